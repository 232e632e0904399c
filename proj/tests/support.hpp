#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "tailpca/detector.hpp"
#include "tailpca/ingest.hpp"
#include "tailpca/returns.hpp"
#include "tailpca/spectra.hpp"
#include "tailpca/synth.hpp"

namespace support {

inline tailpca::PricePanel panel_from(const std::string& prices,
                                      const std::string& dividends = "date,ticker,amount\n") {
  std::istringstream p(prices);
  std::istringstream d(dividends);
  return tailpca::parse_dividends(d, tailpca::parse_prices(p));
}

inline std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(fmt::format("T{:02d}", i));
  return out;
}

inline tailpca::EigenDecomposition decompose(const Eigen::MatrixXd& returns) {
  return tailpca::eigendecompose(
      tailpca::correlation(names(static_cast<std::size_t>(returns.rows())), returns));
}

inline tailpca::SynthSpec spec(std::uint64_t seed, std::size_t stocks, std::size_t days,
                               std::vector<tailpca::Plant> plants = {}) {
  tailpca::SynthSpec s;
  s.seed = seed;
  s.n_stocks = stocks;
  s.n_days = days;
  s.planted = std::move(plants);
  return s;
}

inline tailpca::Plant plant(std::vector<std::size_t> members, double target) {
  tailpca::Plant p;
  p.members = std::move(members);
  p.target_corr = target;
  return p;
}

/// Full pipeline from the generated price panel.
struct Run {
  tailpca::ReturnPanel returns;
  tailpca::EigenDecomposition ed;
  tailpca::Detection detection;
};

inline Run analyze(const tailpca::SynthMarket& market, const tailpca::DetectorConfig& cfg = {}) {
  Run r;
  r.returns = tailpca::compute_returns(market.panel);
  r.ed = tailpca::eigendecompose(tailpca::correlation(r.returns));
  r.detection = tailpca::detect(r.ed, cfg);
  return r;
}

inline std::vector<std::vector<std::string>> member_sets(const tailpca::Detection& d) {
  std::vector<std::vector<std::string>> out;
  for (const auto& g : d.groups) {
    auto m = g.members;
    std::sort(m.begin(), m.end());
    out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<std::vector<std::string>> planted_sets(const tailpca::SynthMarket& market) {
  std::vector<std::vector<std::string>> out;
  for (const auto& t : market.truth) {
    auto m = t.tickers;
    std::sort(m.begin(), m.end());
    out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace support
