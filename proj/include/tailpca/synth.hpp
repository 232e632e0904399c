#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "tailpca/date.hpp"
#include "tailpca/ingest.hpp"

namespace tailpca {

/// A set of stocks forced to a target pairwise return correlation.
///
/// `members` are existing stock indices; `fresh` appends that many new stocks
/// to the market and adds them to the plant. Days refer to return indices
/// [start_day, end_day).
struct Plant {
  std::vector<std::size_t> members;
  std::size_t fresh = 0;
  double target_corr = 0.0;
  std::optional<std::size_t> start_day;
  std::optional<std::size_t> end_day;
  /// Copy the first member's |beta| and idiosyncratic vol onto the others.
  bool match_exposure = true;
};

struct DividendEvent {
  std::size_t stock;
  std::size_t day;
  /// Dividend as a fraction of that day's close.
  double yield;
};

struct PeriodicDividend {
  std::size_t every;
  double yield;
};

struct SynthSpec {
  std::uint64_t seed = 0;
  std::size_t n_days = 1000;
  std::size_t n_stocks = 50;
  double market_vol = 0.01;
  std::pair<double, double> market_beta_range{0.4, 1.0};
  std::pair<double, double> idio_vol_range{0.01, 0.02};
  double base_price = 50.0;
  Date start_date{std::chrono::year{2000}, std::chrono::month{1},
                  std::chrono::day{3}};
  std::vector<Plant> planted;
  std::vector<DividendEvent> dividends;
  std::optional<PeriodicDividend> periodic_dividend;

  std::size_t total_stocks() const;
  /// Throws SpecError.
  void validate() const;
};

struct PlantedTruth {
  std::size_t id;
  std::vector<std::size_t> indices;
  std::vector<std::string> tickers;
  double target_corr;
  /// Correlation of the mixed shocks needed to reach the target.
  double shock_corr;
  std::size_t start_day;
  std::size_t end_day;
};

struct SynthMarket {
  PricePanel panel;
  /// Generated simple returns, stocks x (n_days - 1).
  Eigen::MatrixXd returns;
  Eigen::VectorXd betas;
  Eigen::VectorXd idio_vols;
  std::vector<PlantedTruth> truth;
};

/// r_i(t) = beta_i m(t) + sigma_i e_i(t) with standard normal shocks, planted
/// members mixing shared shocks. Prices integrate returns from base_price and
/// are discounted by the cumulative dividend factor so that the dividend
/// adjusted prices reproduce the generated returns. Deterministic per seed.
SynthMarket generate(const SynthSpec& spec);

std::string synth_ticker(std::size_t index, std::size_t total);

SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthSpec& spec);
/// Spec echo, generator metadata and the planted structure.
nlohmann::json answer_key(const SynthSpec& spec, const SynthMarket& market);

}  // namespace tailpca
