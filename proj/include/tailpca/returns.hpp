#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "tailpca/date.hpp"
#include "tailpca/ingest.hpp"

namespace tailpca {

/// Dividend-adjusted simple returns.
///
/// Column t of `returns` spans `price_dates[t]` -> `price_dates[t + 1]` and is
/// labelled with its start date `dates[t]`.
struct ReturnPanel {
  std::vector<Date> dates;
  std::vector<Date> price_dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd returns;
  Eigen::MatrixXd adjusted_prices;

  std::size_t n_assets() const noexcept { return tickers.size(); }
  std::size_t n_observations() const noexcept { return dates.size(); }

  /// Sub-panel over the given asset rows, in the given order.
  ReturnPanel select_assets(std::span<const std::size_t> rows) const;
};

/// Forward simple returns along each row: (x(t+1) - x(t)) / x(t).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
simple_returns(const Eigen::MatrixBase<Derived>& levels) {
  const Eigen::Index n = levels.cols();
  if (n < 2) {
    return Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic,
                         Eigen::Dynamic>(levels.rows(), 0);
  }
  const auto head = levels.leftCols(n - 1);
  const auto tail = levels.rightCols(n - 1);
  return ((tail - head).array() / head.array()).matrix();
}

/// Running product of daily factors 1 + D(t)/P(t), with P(t) the same-day
/// close. Factor is 1 on days without a dividend.
Eigen::VectorXd dividend_factors(const PricePanel& panel,
                                 std::string_view ticker);

/// P(t) times the cumulative dividend factor.
Eigen::VectorXd adjust_prices(const PricePanel& panel, std::string_view ticker);

/// Requires a complete panel with at least three dates.
ReturnPanel compute_returns(const PricePanel& panel);

/// `date,ticker,pnew`
void write_adjusted_prices(std::ostream& out, const ReturnPanel& rp);
/// `date,ticker,return`, dated by the start of each return interval.
void write_returns(std::ostream& out, const ReturnPanel& rp);

}  // namespace tailpca
