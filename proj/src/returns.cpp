#include "tailpca/returns.hpp"

#include <ostream>

#include <fmt/format.h>

#include "tailpca/errors.hpp"

namespace tailpca {

namespace {

std::size_t complete_asset(const PricePanel& panel, std::string_view ticker) {
  const auto asset = panel.ticker_index(ticker);
  if (!asset) throw ReferenceError(fmt::format("unknown ticker `{}`", ticker));
  for (std::size_t t = 0; t < panel.n_dates(); ++t) {
    if (!panel.has_price(*asset, t)) {
      throw DataError("incomplete_series",
                      fmt::format("ticker `{}` has no price on {}", ticker,
                                  format_date(panel.dates[t])));
    }
  }
  return *asset;
}

Eigen::VectorXd cumulative_factors(const PricePanel& panel, std::size_t asset) {
  const auto row = static_cast<Eigen::Index>(asset);
  Eigen::VectorXd factors(static_cast<Eigen::Index>(panel.n_dates()));
  double running = 1.0;
  auto it = panel.dividends.lower_bound({asset, 0});
  for (std::size_t t = 0; t < panel.n_dates(); ++t) {
    if (it != panel.dividends.end() && it->first.ticker == asset && it->first.date == t) {
      running *= 1.0 + it->second / panel.prices(row, static_cast<Eigen::Index>(t));
      ++it;
    }
    factors(static_cast<Eigen::Index>(t)) = running;
  }
  return factors;
}

}  // namespace

ReturnPanel ReturnPanel::select_assets(std::span<const std::size_t> rows) const {
  ReturnPanel out;
  out.dates = dates;
  out.price_dates = price_dates;
  out.returns.resize(static_cast<Eigen::Index>(rows.size()), returns.cols());
  out.adjusted_prices.resize(static_cast<Eigen::Index>(rows.size()), adjusted_prices.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto dst = static_cast<Eigen::Index>(k);
    const auto src = static_cast<Eigen::Index>(rows[k]);
    out.tickers.push_back(tickers.at(rows[k]));
    out.returns.row(dst) = returns.row(src);
    out.adjusted_prices.row(dst) = adjusted_prices.row(src);
  }
  return out;
}

Eigen::VectorXd dividend_factors(const PricePanel& panel, std::string_view ticker) {
  return cumulative_factors(panel, complete_asset(panel, ticker));
}

Eigen::VectorXd adjust_prices(const PricePanel& panel, std::string_view ticker) {
  const auto asset = complete_asset(panel, ticker);
  const Eigen::VectorXd factors = cumulative_factors(panel, asset);
  return panel.prices.row(static_cast<Eigen::Index>(asset)).transpose().cwiseProduct(factors);
}

ReturnPanel compute_returns(const PricePanel& panel) {
  if (panel.n_dates() < 3) {
    throw InsufficientHistoryError(fmt::format(
        "{} dates give {} returns; a correlation needs at least 2", panel.n_dates(),
        panel.n_dates() == 0 ? 0 : panel.n_dates() - 1));
  }
  ReturnPanel rp;
  rp.tickers = panel.tickers;
  rp.price_dates = panel.dates;
  rp.dates.assign(panel.dates.begin(), panel.dates.end() - 1);
  rp.adjusted_prices.resize(panel.prices.rows(), panel.prices.cols());
  for (std::size_t i = 0; i < panel.n_assets(); ++i) {
    rp.adjusted_prices.row(static_cast<Eigen::Index>(i)) =
        adjust_prices(panel, panel.tickers[i]).transpose();
  }
  rp.returns = simple_returns(rp.adjusted_prices);
  return rp;
}

void write_adjusted_prices(std::ostream& out, const ReturnPanel& rp) {
  out << "date,ticker,pnew\n";
  for (std::size_t t = 0; t < rp.price_dates.size(); ++t) {
    const auto date = format_date(rp.price_dates[t]);
    for (std::size_t i = 0; i < rp.n_assets(); ++i) {
      out << fmt::format("{},{},{}\n", date, rp.tickers[i],
                         rp.adjusted_prices(static_cast<Eigen::Index>(i),
                                            static_cast<Eigen::Index>(t)));
    }
  }
}

void write_returns(std::ostream& out, const ReturnPanel& rp) {
  out << "date,ticker,return\n";
  for (std::size_t t = 0; t < rp.n_observations(); ++t) {
    const auto date = format_date(rp.dates[t]);
    for (std::size_t i = 0; i < rp.n_assets(); ++i) {
      out << fmt::format("{},{},{}\n", date, rp.tickers[i],
                         rp.returns(static_cast<Eigen::Index>(i),
                                    static_cast<Eigen::Index>(t)));
    }
  }
}

}  // namespace tailpca
