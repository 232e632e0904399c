#include "tailpca/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <fmt/format.h>

#include "tailpca/correlation.hpp"
#include "tailpca/errors.hpp"

namespace tailpca {

namespace {

// mt19937_64 driven uniforms and Box-Muller normals; independent of the
// standard library's distribution implementations.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    cached_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool cached_ = false;
};

struct ResolvedPlant {
  std::vector<std::size_t> indices;
  std::size_t start;
  std::size_t end;
};

std::vector<ResolvedPlant> resolve_plants(const SynthSpec& spec) {
  std::vector<ResolvedPlant> out;
  std::size_t next_fresh = spec.n_stocks;
  const std::size_t n_obs = spec.n_days - 1;
  for (const auto& plant : spec.planted) {
    ResolvedPlant r{plant.members, plant.start_day.value_or(0), plant.end_day.value_or(n_obs)};
    for (std::size_t k = 0; k < plant.fresh; ++k) r.indices.push_back(next_fresh++);
    out.push_back(std::move(r));
  }
  return out;
}

std::string plant_name(std::size_t id) { return fmt::format("plant {}", id); }

}  // namespace

std::size_t SynthSpec::total_stocks() const {
  std::size_t total = n_stocks;
  for (const auto& p : planted) total += p.fresh;
  return total;
}

void SynthSpec::validate() const {
  if (total_stocks() < 2) throw SpecError("need at least 2 stocks");
  if (n_days < 3) throw SpecError("n_days must be at least 3");
  if (!(market_vol >= 0.0) || !std::isfinite(market_vol)) {
    throw SpecError("market_vol must be finite and non-negative");
  }
  if (!(market_beta_range.first <= market_beta_range.second)) {
    throw SpecError("market_beta_range must be [low, high]");
  }
  if (!(idio_vol_range.first >= 0.0 && idio_vol_range.first <= idio_vol_range.second)) {
    throw SpecError("idio_vol_range must be [low, high] with low >= 0");
  }
  if (!(base_price > 0.0) || !std::isfinite(base_price)) {
    throw SpecError("base_price must be positive");
  }
  const std::size_t n_obs = n_days - 1;
  std::set<std::size_t> used;
  for (std::size_t id = 0; id < planted.size(); ++id) {
    const auto& p = planted[id];
    const auto name = plant_name(id);
    const std::size_t size = p.members.size() + p.fresh;
    if (size < 2) throw SpecError(fmt::format("{}: needs at least 2 members", name));
    if (!(std::abs(p.target_corr) <= 1.0)) {
      throw SpecError(fmt::format("{}: target_corr {} outside [-1, 1]", name, p.target_corr));
    }
    if (p.target_corr < 0.0 && size != 2) {
      throw SpecError(fmt::format("{}: a negative target needs exactly 2 members", name));
    }
    if (size > 2 && !p.match_exposure) {
      throw SpecError(fmt::format("{}: groups of more than 2 need match_exposure", name));
    }
    for (std::size_t m : p.members) {
      if (m >= n_stocks) throw SpecError(fmt::format("{}: member {} out of range", name, m));
      if (!used.insert(m).second) {
        throw SpecError(fmt::format("{}: member {} already planted", name, m));
      }
    }
    const std::size_t start = p.start_day.value_or(0);
    const std::size_t end = p.end_day.value_or(n_obs);
    if (!(start < end && end <= n_obs)) {
      throw SpecError(fmt::format("{}: regime [{}, {}) outside [0, {}]", name, start, end, n_obs));
    }
  }
  for (const auto& d : dividends) {
    if (d.stock >= total_stocks() || d.day >= n_days || !(d.yield >= 0.0)) {
      throw SpecError(fmt::format("invalid dividend event (stock {}, day {}, yield {})", d.stock,
                                  d.day, d.yield));
    }
  }
  if (periodic_dividend &&
      (periodic_dividend->every < 1 || !(periodic_dividend->yield >= 0.0))) {
    throw SpecError("periodic_dividend needs every >= 1 and yield >= 0");
  }
}

std::string synth_ticker(std::size_t index, std::size_t total) {
  const std::size_t width = std::max<std::size_t>(3, fmt::format("{}", total - 1).size());
  return fmt::format("S{:0{}}", index, width);
}

SynthMarket generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t p = spec.total_stocks();
  const std::size_t n_obs = spec.n_days - 1;
  const auto P = static_cast<Eigen::Index>(p);
  const auto N = static_cast<Eigen::Index>(n_obs);
  const double var_m = spec.market_vol * spec.market_vol;

  NormalSource rng(spec.seed);
  SynthMarket out;
  out.betas.resize(P);
  out.idio_vols.resize(P);
  for (Eigen::Index i = 0; i < P; ++i) {
    out.betas(i) = rng.uniform(spec.market_beta_range.first, spec.market_beta_range.second);
    out.idio_vols(i) = rng.uniform(spec.idio_vol_range.first, spec.idio_vol_range.second);
  }
  Eigen::VectorXd market(N);
  for (Eigen::Index t = 0; t < N; ++t) market(t) = spec.market_vol * rng.normal();
  Eigen::MatrixXd shocks(P, N);
  for (Eigen::Index i = 0; i < P; ++i) {
    for (Eigen::Index t = 0; t < N; ++t) shocks(i, t) = rng.normal();
  }

  const auto plants = resolve_plants(spec);
  for (std::size_t id = 0; id < plants.size(); ++id) {
    const auto& plant = spec.planted[id];
    const auto& r = plants[id];
    const auto name = plant_name(id);
    const auto anchor = static_cast<Eigen::Index>(r.indices.front());
    const double flip = plant.target_corr < 0.0 ? -1.0 : 1.0;
    if (plant.match_exposure) {
      for (std::size_t k = 1; k < r.indices.size(); ++k) {
        const auto j = static_cast<Eigen::Index>(r.indices[k]);
        out.betas(j) = flip * out.betas(anchor);
        out.idio_vols(j) = out.idio_vols(anchor);
      }
    }
    const auto lo = static_cast<Eigen::Index>(r.start);
    const auto len = static_cast<Eigen::Index>(r.end - r.start);

    PlantedTruth truth{id, r.indices, {}, plant.target_corr, 0.0, r.start, r.end};
    if (r.indices.size() == 2) {
      const auto j = static_cast<Eigen::Index>(r.indices[1]);
      const double ba = out.betas(anchor);
      const double bj = out.betas(j);
      const double sa = out.idio_vols(anchor);
      const double sj = out.idio_vols(j);
      const double total_a = std::sqrt(ba * ba * var_m + sa * sa);
      const double total_j = std::sqrt(bj * bj * var_m + sj * sj);
      const double needed = plant.target_corr * total_a * total_j - ba * bj * var_m;
      double mix = 0.0;
      if (sa * sj > 0.0) {
        mix = needed / (sa * sj);
      } else if (std::abs(needed) > 1e-12 * total_a * total_j) {
        throw SpecError(fmt::format("{}: target {} unreachable without idiosyncratic noise",
                                    name, plant.target_corr));
      }
      if (std::abs(mix) > 1.0 + 1e-12) {
        throw SpecError(fmt::format(
            "{}: target {} infeasible given market exposure (shock correlation {})", name,
            plant.target_corr, mix));
      }
      mix = std::clamp(mix, -1.0, 1.0);
      truth.shock_corr = mix;
      shocks.row(j).segment(lo, len) = mix * shocks.row(anchor).segment(lo, len) +
                                       std::sqrt(1.0 - mix * mix) * shocks.row(j).segment(lo, len);
    } else {
      const double b = out.betas(anchor);
      const double s = out.idio_vols(anchor);
      double mix = 1.0;
      if (s > 0.0) {
        mix = (plant.target_corr * (b * b * var_m + s * s) - b * b * var_m) / (s * s);
      } else if (plant.target_corr != 1.0) {
        throw SpecError(fmt::format("{}: target {} unreachable without idiosyncratic noise",
                                    name, plant.target_corr));
      }
      if (mix < -1e-12 || mix > 1.0 + 1e-12) {
        throw SpecError(fmt::format(
            "{}: target {} infeasible given market exposure (shock correlation {})", name,
            plant.target_corr, mix));
      }
      mix = std::clamp(mix, 0.0, 1.0);
      truth.shock_corr = mix;
      Eigen::RowVectorXd common(len);
      for (Eigen::Index t = 0; t < len; ++t) common(t) = rng.normal();
      for (std::size_t idx : r.indices) {
        const auto m = static_cast<Eigen::Index>(idx);
        shocks.row(m).segment(lo, len) =
            std::sqrt(mix) * common + std::sqrt(1.0 - mix) * shocks.row(m).segment(lo, len);
      }
    }
    out.truth.push_back(std::move(truth));
  }

  out.returns = out.betas * market.transpose() + out.idio_vols.asDiagonal() * shocks;
  if ((out.returns.array() <= -1.0).any()) {
    throw SpecError("generated a return at or below -100%; lower the volatilities");
  }

  // Dividend yields per (stock, price day).
  Eigen::MatrixXd yields = Eigen::MatrixXd::Zero(P, static_cast<Eigen::Index>(spec.n_days));
  for (const auto& d : spec.dividends) {
    yields(static_cast<Eigen::Index>(d.stock), static_cast<Eigen::Index>(d.day)) += d.yield;
  }
  if (spec.periodic_dividend) {
    const auto& pd = *spec.periodic_dividend;
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t t = 1; t < spec.n_days; ++t) {
        if ((t + i) % pd.every == 0) {
          yields(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) += pd.yield;
        }
      }
    }
  }

  PricePanel& panel = out.panel;
  for (std::size_t i = 0; i < p; ++i) panel.tickers.push_back(synth_ticker(i, p));
  Date day = spec.start_date;
  const std::chrono::weekday wd{std::chrono::sys_days{day}};
  if (wd == std::chrono::Saturday || wd == std::chrono::Sunday) day = next_weekday(day);
  for (std::size_t t = 0; t < spec.n_days; ++t) {
    panel.dates.push_back(day);
    day = next_weekday(day);
  }
  panel.prices.resize(P, static_cast<Eigen::Index>(spec.n_days));
  for (Eigen::Index i = 0; i < P; ++i) {
    double adjusted = spec.base_price;
    double factor = 1.0;
    for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(spec.n_days); ++t) {
      if (t > 0) adjusted *= 1.0 + out.returns(i, t - 1);
      factor *= 1.0 + yields(i, t);
      const double close = adjusted / factor;
      panel.prices(i, t) = close;
      if (yields(i, t) > 0.0) {
        panel.dividends[{static_cast<std::size_t>(i), static_cast<std::size_t>(t)}] =
            yields(i, t) * close;
      }
    }
  }

  for (auto& truth : out.truth) {
    for (std::size_t idx : truth.indices) truth.tickers.push_back(panel.tickers[idx]);
  }
  return out;
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{
      "seed",          "n_days",     "n_stocks", "market_vol", "market_beta_range",
      "idio_vol_range", "base_price", "start_date", "planted",   "dividends",
      "periodic_dividend"};
  if (!j.is_object()) throw SpecError("spec must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw SpecError(fmt::format("unknown spec key `{}`", key));
  }
  SynthSpec spec;
  try {
    auto range = [](const nlohmann::json& v) {
      if (!v.is_array() || v.size() != 2) throw SpecError("ranges are [low, high] arrays");
      return std::pair<double, double>{v[0].get<double>(), v[1].get<double>()};
    };
    spec.seed = j.value("seed", spec.seed);
    spec.n_days = j.value("n_days", spec.n_days);
    spec.n_stocks = j.value("n_stocks", spec.n_stocks);
    spec.market_vol = j.value("market_vol", spec.market_vol);
    if (j.contains("market_beta_range")) spec.market_beta_range = range(j["market_beta_range"]);
    if (j.contains("idio_vol_range")) spec.idio_vol_range = range(j["idio_vol_range"]);
    spec.base_price = j.value("base_price", spec.base_price);
    if (j.contains("start_date")) {
      const auto d = parse_date(j["start_date"].get<std::string>());
      if (!d) throw SpecError("start_date must be YYYY-MM-DD");
      spec.start_date = *d;
    }
    for (const auto& pj : j.value("planted", nlohmann::json::array())) {
      Plant plant;
      plant.members = pj.value("members", std::vector<std::size_t>{});
      plant.fresh = pj.value("fresh", std::size_t{0});
      if (!pj.contains("target_corr")) throw SpecError("each plant needs target_corr");
      plant.target_corr = pj["target_corr"].get<double>();
      if (pj.contains("start_day")) plant.start_day = pj["start_day"].get<std::size_t>();
      if (pj.contains("end_day")) plant.end_day = pj["end_day"].get<std::size_t>();
      plant.match_exposure = pj.value("match_exposure", true);
      spec.planted.push_back(std::move(plant));
    }
    for (const auto& dj : j.value("dividends", nlohmann::json::array())) {
      spec.dividends.push_back({dj.at("stock").get<std::size_t>(), dj.at("day").get<std::size_t>(),
                                dj.at("yield").get<double>()});
    }
    if (j.contains("periodic_dividend")) {
      const auto& pd = j["periodic_dividend"];
      spec.periodic_dividend =
          PeriodicDividend{pd.at("every").get<std::size_t>(), pd.at("yield").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(fmt::format("malformed spec: {}", e.what()));
  }
  spec.validate();
  return spec;
}

nlohmann::json to_json(const SynthSpec& spec) {
  nlohmann::json j;
  j["seed"] = spec.seed;
  j["n_days"] = spec.n_days;
  j["n_stocks"] = spec.n_stocks;
  j["market_vol"] = spec.market_vol;
  j["market_beta_range"] = {spec.market_beta_range.first, spec.market_beta_range.second};
  j["idio_vol_range"] = {spec.idio_vol_range.first, spec.idio_vol_range.second};
  j["base_price"] = spec.base_price;
  j["start_date"] = format_date(spec.start_date);
  j["planted"] = nlohmann::json::array();
  for (const auto& p : spec.planted) {
    nlohmann::json pj{{"members", p.members},
                      {"fresh", p.fresh},
                      {"target_corr", p.target_corr},
                      {"match_exposure", p.match_exposure}};
    if (p.start_day) pj["start_day"] = *p.start_day;
    if (p.end_day) pj["end_day"] = *p.end_day;
    j["planted"].push_back(std::move(pj));
  }
  j["dividends"] = nlohmann::json::array();
  for (const auto& d : spec.dividends) {
    j["dividends"].push_back({{"stock", d.stock}, {"day", d.day}, {"yield", d.yield}});
  }
  if (spec.periodic_dividend) {
    j["periodic_dividend"] = {{"every", spec.periodic_dividend->every},
                              {"yield", spec.periodic_dividend->yield}};
  }
  return j;
}

nlohmann::json answer_key(const SynthSpec& spec, const SynthMarket& market) {
  nlohmann::json j;
  j["generator"] = {{"tool", "tailpca"},
                    {"version", TAILPCA_VERSION},
                    {"prng", "mt19937_64"},
                    {"normal", "box-muller"},
                    {"model", "r_i(t) = beta_i m(t) + sigma_i e_i(t)"}};
  j["spec"] = to_json(spec);
  j["tickers"] = market.panel.tickers;
  j["planted"] = nlohmann::json::array();
  for (const auto& t : market.truth) {
    Eigen::MatrixXd slice(static_cast<Eigen::Index>(t.indices.size()),
                          static_cast<Eigen::Index>(t.end_day - t.start_day));
    for (std::size_t k = 0; k < t.indices.size(); ++k) {
      slice.row(static_cast<Eigen::Index>(k)) =
          market.returns.row(static_cast<Eigen::Index>(t.indices[k]))
              .segment(static_cast<Eigen::Index>(t.start_day), slice.cols());
    }
    double realized = 1.0;
    if (slice.cols() >= 2 && (centered_sum_squares(slice).array() > 0.0).all()) {
      const Eigen::MatrixXd r = pearson_correlation(slice);
      for (Eigen::Index a = 0; a < r.rows(); ++a) {
        for (Eigen::Index b = a + 1; b < r.cols(); ++b) {
          realized = std::min(realized, std::abs(r(a, b)));
        }
      }
    }
    j["planted"].push_back({{"id", t.id},
                            {"tickers", t.tickers},
                            {"indices", t.indices},
                            {"target_corr", t.target_corr},
                            {"shock_corr", t.shock_corr},
                            {"start_day", t.start_day},
                            {"end_day", t.end_day},
                            {"realized_min_abs_corr", realized}});
  }
  return j;
}

}  // namespace tailpca
