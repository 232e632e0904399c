#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include <fmt/format.h>

#include "tailpca/correlation.hpp"
#include "tailpca/detector.hpp"
#include "tailpca/errors.hpp"

namespace tailpca {

namespace {

WindowDetection run_window(const ReturnPanel& rp, std::size_t start, std::size_t window,
                           const DetectorConfig& cfg) {
  WindowDetection w;
  w.start = start;
  w.start_date = rp.dates[start];
  w.observations = window;

  const auto block = rp.returns.middleCols(static_cast<Eigen::Index>(start),
                                           static_cast<Eigen::Index>(window));
  const Eigen::VectorXd ss = centered_sum_squares(block);
  std::vector<Eigen::Index> keep;
  std::vector<std::string> tickers;
  for (std::size_t i = 0; i < rp.n_assets(); ++i) {
    if (ss(static_cast<Eigen::Index>(i)) > 0.0) {
      keep.push_back(static_cast<Eigen::Index>(i));
      tickers.push_back(rp.tickers[i]);
    } else {
      w.dropped.push_back(rp.tickers[i]);
      w.warnings.push_back(fmt::format("dropped `{}`: zero variance in window", rp.tickers[i]));
    }
  }
  w.assets = keep.size();
  if (window < w.assets + 1) {
    w.rank_deficient = true;
    w.warnings.push_back(fmt::format(
        "{} observations for {} assets: correlation matrix is rank deficient", window,
        w.assets));
  }
  if (!cfg.eigenvalue_ceiling && w.assets <= cfg.trailing_count) {
    w.skipped = true;
    w.warnings.push_back(fmt::format("window skipped: {} assets for trailing_count {}",
                                     w.assets, cfg.trailing_count));
    return w;
  }

  Eigen::MatrixXd kept(static_cast<Eigen::Index>(keep.size()), block.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    kept.row(static_cast<Eigen::Index>(k)) = block.row(keep[k]);
  }
  const auto ed = eigendecompose(correlation(std::move(tickers), kept));
  w.detection = detect(ed, cfg);
  return w;
}

}  // namespace

std::vector<WindowDetection> rolling_detect(const ReturnPanel& rp, std::size_t window,
                                            std::size_t step, const DetectorConfig& cfg,
                                            unsigned threads) {
  cfg.validate();
  if (step < 1) throw ConfigError("step must be at least 1");
  if (window < 3) throw ConfigError(fmt::format("window {} is below the minimum of 3", window));
  if (window > rp.n_observations()) {
    throw ConfigError(fmt::format("window {} exceeds the {} available observations", window,
                                  rp.n_observations()));
  }

  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + window <= rp.n_observations(); s += step) starts.push_back(s);

  std::vector<WindowDetection> out(starts.size());
  std::vector<std::exception_ptr> errors(starts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < starts.size(); k = next++) {
      try {
        out[k] = run_window(rp, starts[k], window, cfg);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };

  const unsigned n_workers =
      std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(starts.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace tailpca
