#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "tailpca/date.hpp"

namespace tailpca {

struct DividendKey {
  std::size_t ticker;
  std::size_t date;

  auto operator<=>(const DividendKey&) const = default;
};

/// Date x asset grid of closing prices with sparse cash dividends.
///
/// `prices(i, t)` is the close of `tickers[i]` on `dates[t]`, or NaN when the
/// asset did not trade that day. Dividends are keyed by (ticker, date) index
/// and always refer to a cell that holds a price.
struct PricePanel {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd prices;
  std::map<DividendKey, double> dividends;

  std::size_t n_assets() const noexcept { return tickers.size(); }
  std::size_t n_dates() const noexcept { return dates.size(); }

  std::optional<std::size_t> ticker_index(std::string_view ticker) const;
  bool has_price(std::size_t asset, std::size_t date) const;

  /// Cell-wise equality; two missing cells compare equal.
  friend bool operator==(const PricePanel& a, const PricePanel& b);
};

struct DroppedTicker {
  std::string ticker;
  std::size_t missing_days;
};

struct FilterResult {
  PricePanel panel;
  std::vector<DroppedTicker> dropped;
};

/// Reads `date,ticker,close` rows. Tickers are ordered lexicographically and
/// dates ascending; the calendar is the union of all dates in the stream.
PricePanel parse_prices(std::istream& in);

/// Attaches `date,ticker,amount` events to `panel`. Zero amounts are
/// accepted and dropped.
PricePanel parse_dividends(std::istream& in, PricePanel panel);

/// Keeps only tickers with a price on every date of the panel.
FilterResult filter_complete(const PricePanel& panel);

void write_prices(std::ostream& out, const PricePanel& panel);
void write_dividends(std::ostream& out, const PricePanel& panel);

}  // namespace tailpca
