// tailpca: detect highly correlated assets from the smallest-variance
// principal components of their return correlation matrix.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "digest.hpp"
#include "json.hpp"
#include "tailpca/detector.hpp"
#include "tailpca/errors.hpp"
#include "tailpca/ingest.hpp"
#include "tailpca/report.hpp"
#include "tailpca/returns.hpp"
#include "tailpca/serialize.hpp"
#include "tailpca/spectra.hpp"
#include "tailpca/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;

struct AnalyzeArgs {
  std::string prices;
  std::string dividends;
  std::string out = "tailpca_out";
  tailpca::DetectorConfig cfg;
  double eigenvalue_ceiling = std::numeric_limits<double>::quiet_NaN();
  std::size_t window = 0;
  std::size_t step = 0;
  unsigned threads = 1;
  std::vector<std::string> secondary_axis;
};

struct SynthArgs {
  std::string spec;
  std::string out;
};

void report_error(std::string_view kind, std::string_view message) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

std::string utc_now() {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  const auto day = std::chrono::floor<std::chrono::days>(now);
  const std::chrono::hh_mm_ss hms{now - day};
  return fmt::format("{}T{:02d}:{:02d}:{:02d}Z",
                     tailpca::format_date(std::chrono::year_month_day{day}), hms.hours().count(),
                     hms.minutes().count(), hms.seconds().count());
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tailpca::DataError("io_error", fmt::format("cannot open `{}`", path));
  return in;
}

// Collects every file written under the output directory.
class OutputDir {
 public:
  explicit OutputDir(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) {
      throw tailpca::DataError("io_error",
                               fmt::format("cannot create `{}`: {}", root_.string(), ec.message()));
    }
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(root_ / name, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) {
      throw tailpca::DataError("io_error", fmt::format("cannot write `{}`", (root_ / name).string()));
    }
    written_.push_back(name);
  }

  template <typename Writer>
  void write_with(const std::string& name, Writer&& writer) {
    std::ostringstream buf;
    writer(buf);
    write(name, buf.str());
  }

  std::vector<std::string> files() const {
    auto out = written_;
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  fs::path root_;
  std::vector<std::string> written_;
};

int run_analyze(const AnalyzeArgs& args, const std::vector<std::string>& argv) {
  const std::string started = utc_now();
  tailpca::DetectorConfig cfg = args.cfg;
  if (!std::isnan(args.eigenvalue_ceiling)) cfg.eigenvalue_ceiling = args.eigenvalue_ceiling;
  cfg.validate();

  auto prices_in = open_input(args.prices);
  auto panel = tailpca::parse_prices(prices_in);
  auto dividends_in = open_input(args.dividends);
  panel = tailpca::parse_dividends(dividends_in, std::move(panel));
  const std::size_t input_tickers = panel.n_assets();
  auto filtered = tailpca::filter_complete(panel);
  for (const auto& d : filtered.dropped) {
    std::cerr << fmt::format("note: dropped `{}` ({} missing days)\n", d.ticker, d.missing_days);
  }

  const auto rp = tailpca::compute_returns(filtered.panel);
  const auto cm = tailpca::correlation(rp);
  const auto ed = tailpca::eigendecompose(cm);
  const auto detection = tailpca::detect(ed, cfg);

  std::vector<tailpca::WindowDetection> windows;
  if (args.window > 0) {
    windows = tailpca::rolling_detect(rp, args.window, args.step, cfg, args.threads);
  }

  OutputDir out(args.out);
  json report = tailpca::detection_report(ed, detection, cfg);
  report["observations"] = rp.n_observations();
  report["universe"] = {{"input_tickers", input_tickers},
                        {"retained", filtered.panel.n_assets()},
                        {"dropped", json::array()}};
  for (const auto& d : filtered.dropped) {
    report["universe"]["dropped"].push_back({{"ticker", d.ticker}, {"missing_days", d.missing_days}});
  }
  out.write("detection.json", report.dump(2) + "\n");
  out.write_with("detection.csv", [&](auto& os) { tailpca::write_detection_csv(os, detection); });

  const std::size_t p = ed.size();
  const std::size_t tail =
      std::min(p, cfg.eigenvalue_ceiling
                      ? std::max<std::size_t>(2, detection.scanned_pcs.size())
                      : cfg.trailing_count);
  const auto rows = tailpca::eigen_table(ed, tail);
  out.write_with("eigen_tail.csv", [&](auto& os) { tailpca::write_eigen_table(os, rows); });
  out.write_with("eigenvalues.csv", [&](auto& os) { tailpca::write_eigenvalues_csv(os, ed); });
  out.write_with("correlation.csv", [&](auto& os) { tailpca::write_correlation_csv(os, cm); });
  out.write_with("adjusted_prices.csv", [&](auto& os) { tailpca::write_adjusted_prices(os, rp); });
  out.write_with("returns.csv", [&](auto& os) { tailpca::write_returns(os, rp); });

  for (std::size_t r = p - tail + 1; r < p; ++r) {
    const auto sheet = tailpca::biplot_sheet(ed, r, r + 1, detection.groups);
    const auto stem = tailpca::biplot_file_stem(r, r + 1);
    out.write(stem + ".svg", tailpca::render_biplot_svg(sheet));
    out.write_with(stem + ".csv", [&](auto& os) { tailpca::write_biplot_csv(os, sheet); });
  }

  const tailpca::TrackOptions track_options{args.secondary_axis};
  for (std::size_t g = 0; g < detection.groups.size(); ++g) {
    const auto tracks = tailpca::price_tracks(rp, detection.groups[g], track_options);
    const auto stem = fmt::format("tracks_group{}", g + 1);
    out.write_with(stem + ".csv", [&](auto& os) { tailpca::write_tracks_csv(os, tracks); });
    out.write(stem + ".svg", tailpca::render_tracks_svg(tracks));
  }

  if (args.window > 0) {
    out.write("rolling.json",
              tailpca::rolling_report(windows, args.window, args.step, cfg).dump(2) + "\n");
    out.write_with("rolling.csv", [&](auto& os) { tailpca::write_rolling_csv(os, windows); });
  }

  json manifest;
  manifest["tool"] = {{"name", "tailpca"}, {"version", TAILPCA_VERSION}};
  manifest["command"] = argv;
  manifest["inputs"] = json::array();
  for (const auto& path : {args.prices, args.dividends}) {
    const auto d = tailpca::tools::digest_file(path);
    manifest["inputs"].push_back({{"path", path}, {"bytes", d.bytes}, {"sha256", d.sha256}});
  }
  manifest["config"] = tailpca::to_json(cfg);
  manifest["rolling"] = args.window > 0 ? json{{"window", args.window}, {"step", args.step}}
                                        : json(nullptr);
  manifest["threads"] = args.threads;
  manifest["groups"] = detection.groups.size();
  manifest["started_at"] = started;
  manifest["finished_at"] = utc_now();
  manifest["outputs"] = out.files();
  out.write("manifest.json", manifest.dump(2) + "\n");
  return 0;
}

int run_synth(const SynthArgs& args) {
  std::ifstream in(args.spec);
  if (!in) throw tailpca::ConfigError(fmt::format("cannot open spec `{}`", args.spec));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw tailpca::SpecError(fmt::format("spec is not valid JSON: {}", e.what()));
  }
  const auto spec = tailpca::synth_spec_from_json(j);
  const auto market = tailpca::generate(spec);

  OutputDir out(args.out);
  out.write_with("prices.csv", [&](auto& os) { tailpca::write_prices(os, market.panel); });
  out.write_with("dividends.csv", [&](auto& os) { tailpca::write_dividends(os, market.panel); });
  out.write("answer_key.json", tailpca::answer_key(spec, market).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detect highly correlated assets from low-variance principal components"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option defaults; flags take precedence");

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "Run the detection pipeline on price/dividend CSVs");
  an->add_option("--prices", analyze.prices, "Prices CSV (date,ticker,close)")->required();
  an->add_option("--dividends", analyze.dividends, "Dividends CSV (date,ticker,amount)")->required();
  an->add_option("--out", analyze.out, "Output directory")->capture_default_str();
  an->add_option("--trailing", analyze.cfg.trailing_count, "Number of trailing PCs to scan")
      ->capture_default_str();
  an->add_option("--abs-threshold", analyze.cfg.abs_threshold, "Absolute loading floor")
      ->capture_default_str();
  an->add_option("--rel-threshold", analyze.cfg.rel_threshold,
                 "Fraction of the PC's largest |loading|")
      ->capture_default_str();
  an->add_option("--eigenvalue-ceiling", analyze.eigenvalue_ceiling,
                 "Scan every PC with eigenvalue below this instead of a fixed count");
  an->add_option("--max-eigenvalue", analyze.cfg.max_eigenvalue,
                 "Skip trailing PCs above this eigenvalue (inf disables)")
      ->capture_default_str();
  an->add_option("--min-group-size", analyze.cfg.min_group_size)->capture_default_str();
  an->add_option("--collinear-cos", analyze.cfg.collinear_cos)->capture_default_str();
  an->add_option("--orthogonal-cos", analyze.cfg.orthogonal_cos)->capture_default_str();
  auto* window = an->add_option("--window", analyze.window, "Rolling window length (returns)");
  auto* step = an->add_option("--step", analyze.step, "Rolling window step");
  window->needs(step);
  step->needs(window);
  an->add_option("--threads", analyze.threads, "Worker threads for rolling windows")
      ->capture_default_str();
  an->add_option("--track-secondary", analyze.secondary_axis,
                 "Draw this ticker's price track on a right-hand axis (repeatable)");

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth", "Generate a synthetic market with planted structure");
  sy->add_option("--spec", synth.spec, "Synthetic market spec (JSON)")->required();
  sy->add_option("--out", synth.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << app.help();
    report_error("usage_error", e.what());
    return kExitConfig;
  }

  const std::vector<std::string> args(argv, argv + argc);
  try {
    if (*an) return run_analyze(analyze, args);
    return run_synth(synth);
  } catch (const tailpca::ConfigError& e) {
    report_error(e.kind(), e.what());
    return kExitConfig;
  } catch (const tailpca::DataError& e) {
    report_error(e.kind(), e.what());
    return kExitData;
  } catch (const std::invalid_argument& e) {
    report_error("config_error", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    report_error("internal_error", e.what());
    return kExitData;
  }
}
