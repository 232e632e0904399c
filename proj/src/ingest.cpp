#include "tailpca/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "csv.hpp"
#include "tailpca/errors.hpp"

namespace tailpca {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

long day_number(Date d) {
  return std::chrono::sys_days{d}.time_since_epoch().count();
}

std::optional<double> parse_number(std::string_view text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

void expect_header(detail::LineReader& reader, std::string_view header) {
  std::string line;
  if (!reader.next(line)) {
    throw ParseError(1, fmt::format("missing header `{}`", header));
  }
  if (line != header) {
    throw ParseError(1, fmt::format("expected header `{}`, got `{}`", header, line));
  }
}

struct Row {
  Date date;
  std::string ticker;
  double value;
  std::size_t line;
};

// Reads `date,ticker,<value>` rows after the header; blank lines are skipped.
template <typename Check>
std::vector<Row> read_rows(detail::LineReader& reader, Check&& check_value) {
  std::vector<Row> rows;
  std::string line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line);
    const std::size_t n = reader.line_no();
    if (fields.size() != 3) {
      throw ParseError(n, fmt::format("expected 3 columns, found {}", fields.size()));
    }
    const auto date = parse_date(fields[0]);
    if (!date) throw ParseError(n, fmt::format("unparseable date `{}`", fields[0]));
    if (!detail::valid_ticker(fields[1])) {
      throw ParseError(n, fmt::format("invalid ticker `{}`", fields[1]));
    }
    const auto value = parse_number(fields[2]);
    if (!value) throw ParseError(n, fmt::format("non-numeric value `{}`", fields[2]));
    check_value(*value, n);
    rows.push_back({*date, std::string(fields[1]), *value, n});
  }
  return rows;
}

}  // namespace

std::optional<std::size_t> PricePanel::ticker_index(std::string_view ticker) const {
  const auto it = std::lower_bound(tickers.begin(), tickers.end(), ticker);
  if (it != tickers.end() && *it == ticker) {
    return static_cast<std::size_t>(it - tickers.begin());
  }
  // Panels built in code need not keep tickers sorted.
  const auto lin = std::find(tickers.begin(), tickers.end(), ticker);
  if (lin == tickers.end()) return std::nullopt;
  return static_cast<std::size_t>(lin - tickers.begin());
}

bool PricePanel::has_price(std::size_t asset, std::size_t date) const {
  return !std::isnan(prices(static_cast<Eigen::Index>(asset),
                            static_cast<Eigen::Index>(date)));
}

bool operator==(const PricePanel& a, const PricePanel& b) {
  if (a.dates != b.dates || a.tickers != b.tickers || a.dividends != b.dividends) {
    return false;
  }
  if (a.prices.rows() != b.prices.rows() || a.prices.cols() != b.prices.cols()) {
    return false;
  }
  for (Eigen::Index j = 0; j < a.prices.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.prices.rows(); ++i) {
      const double x = a.prices(i, j);
      const double y = b.prices(i, j);
      if (std::isnan(x) != std::isnan(y)) return false;
      if (!std::isnan(x) && x != y) return false;
    }
  }
  return true;
}

PricePanel parse_prices(std::istream& in) {
  detail::LineReader reader(in);
  expect_header(reader, "date,ticker,close");
  const auto rows = read_rows(reader, [](double v, std::size_t n) {
    if (!(v > 0.0)) throw ParseError(n, fmt::format("non-positive price {}", v));
  });

  std::set<long> day_set;
  std::set<std::string> ticker_set;
  for (const auto& r : rows) {
    day_set.insert(day_number(r.date));
    ticker_set.insert(r.ticker);
  }

  PricePanel panel;
  panel.tickers.assign(ticker_set.begin(), ticker_set.end());
  std::vector<long> days(day_set.begin(), day_set.end());
  panel.dates.reserve(days.size());
  for (long d : days) {
    panel.dates.emplace_back(std::chrono::sys_days{std::chrono::days{d}});
  }
  panel.prices = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(panel.tickers.size()),
                                           static_cast<Eigen::Index>(days.size()), kMissing);

  for (const auto& r : rows) {
    const auto i = static_cast<Eigen::Index>(
        std::lower_bound(panel.tickers.begin(), panel.tickers.end(), r.ticker) -
        panel.tickers.begin());
    const auto t = static_cast<Eigen::Index>(
        std::lower_bound(days.begin(), days.end(), day_number(r.date)) - days.begin());
    if (!std::isnan(panel.prices(i, t))) {
      throw DuplicateKeyError(r.line, fmt::format("duplicate price for ({}, {})",
                                                  format_date(r.date), r.ticker));
    }
    panel.prices(i, t) = r.value;
  }
  return panel;
}

PricePanel parse_dividends(std::istream& in, PricePanel panel) {
  detail::LineReader reader(in);
  expect_header(reader, "date,ticker,amount");
  const auto rows = read_rows(reader, [](double v, std::size_t n) {
    if (v < 0.0) throw ParseError(n, fmt::format("negative dividend {}", v));
  });

  std::vector<long> days;
  days.reserve(panel.dates.size());
  for (const auto& d : panel.dates) days.push_back(day_number(d));

  std::set<DividendKey> seen;
  for (const auto& r : rows) {
    const auto asset = panel.ticker_index(r.ticker);
    const auto it = std::lower_bound(days.begin(), days.end(), day_number(r.date));
    const bool date_known = it != days.end() && *it == day_number(r.date);
    const auto t = static_cast<std::size_t>(it - days.begin());
    if (!asset || !date_known || !panel.has_price(*asset, t)) {
      throw ReferenceError(fmt::format(
          "line {}: dividend ({}, {}, {}) has no matching price", r.line,
          format_date(r.date), r.ticker, r.value));
    }
    const DividendKey key{*asset, t};
    if (!seen.insert(key).second) {
      throw DuplicateKeyError(r.line, fmt::format("duplicate dividend for ({}, {})",
                                                  format_date(r.date), r.ticker));
    }
    if (r.value > 0.0) panel.dividends[key] = r.value;
  }
  return panel;
}

FilterResult filter_complete(const PricePanel& panel) {
  FilterResult out;
  std::vector<std::size_t> keep;
  std::vector<std::size_t> remap(panel.n_assets(), 0);
  for (std::size_t i = 0; i < panel.n_assets(); ++i) {
    std::size_t missing = 0;
    for (std::size_t t = 0; t < panel.n_dates(); ++t) {
      if (!panel.has_price(i, t)) ++missing;
    }
    if (missing == 0) {
      remap[i] = keep.size();
      keep.push_back(i);
    } else {
      out.dropped.push_back({panel.tickers[i], missing});
    }
  }
  if (keep.empty()) {
    throw EmptyUniverseError(fmt::format(
        "no ticker has a price on all {} dates ({} tickers dropped)", panel.n_dates(),
        out.dropped.size()));
  }

  PricePanel& kept = out.panel;
  kept.dates = panel.dates;
  kept.prices.resize(static_cast<Eigen::Index>(keep.size()), panel.prices.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    kept.tickers.push_back(panel.tickers[keep[k]]);
    kept.prices.row(static_cast<Eigen::Index>(k)) =
        panel.prices.row(static_cast<Eigen::Index>(keep[k]));
  }
  for (const auto& [key, amount] : panel.dividends) {
    if (std::find(keep.begin(), keep.end(), key.ticker) != keep.end()) {
      kept.dividends[{remap[key.ticker], key.date}] = amount;
    }
  }
  return out;
}

void write_prices(std::ostream& out, const PricePanel& panel) {
  out << "date,ticker,close\n";
  for (std::size_t t = 0; t < panel.n_dates(); ++t) {
    const auto date = format_date(panel.dates[t]);
    for (std::size_t i = 0; i < panel.n_assets(); ++i) {
      if (!panel.has_price(i, t)) continue;
      out << fmt::format("{},{},{}\n", date, panel.tickers[i],
                         panel.prices(static_cast<Eigen::Index>(i),
                                      static_cast<Eigen::Index>(t)));
    }
  }
}

void write_dividends(std::ostream& out, const PricePanel& panel) {
  out << "date,ticker,amount\n";
  std::vector<std::tuple<std::size_t, std::size_t, double>> rows;
  for (const auto& [key, amount] : panel.dividends) rows.emplace_back(key.date, key.ticker, amount);
  std::sort(rows.begin(), rows.end());
  for (const auto& [t, i, amount] : rows) {
    out << fmt::format("{},{},{}\n", format_date(panel.dates[t]), panel.tickers[i], amount);
  }
}

}  // namespace tailpca
