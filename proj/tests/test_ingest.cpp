#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "tailpca/errors.hpp"
#include "tailpca/ingest.hpp"

using namespace tailpca;
using support::panel_from;

namespace {

const std::string kHeader = "date,ticker,close\n";

std::string ten_days() {
  std::string s = kHeader;
  for (int d = 1; d <= 10; ++d) {
    s += fmt::format("2021-03-{:02d},AAA,{}\n", d, 10 + d);
    s += fmt::format("2021-03-{:02d},BBB,{}\n", d, 20 + d);
    if (d != 4 && d != 7) s += fmt::format("2021-03-{:02d},CCC,{}\n", d, 30 + d);
  }
  return s;
}

template <typename E>
std::size_t error_line(const std::string& prices) {
  try {
    panel_from(prices);
  } catch (const E& e) {
    return e.line();
  }
  FAIL("no error raised");
  return 0;
}

}  // namespace

TEST_CASE("three rows of one ticker") {
  const auto p = panel_from(kHeader + "2020-01-02,X,1\n2020-01-03,X,2\n2020-01-06,X,3\n");
  CHECK(p.n_assets() == 1);
  CHECK(p.n_dates() == 3);
  CHECK(p.prices(0, 2) == 3.0);
  CHECK(p.dividends.empty());
}

TEST_CASE("header only gives an empty panel") {
  const auto p = panel_from(kHeader);
  CHECK(p.n_assets() == 0);
  CHECK(p.n_dates() == 0);
}

TEST_CASE("rows are sorted onto the union calendar") {
  const auto p = panel_from(kHeader + "2020-01-06,B,3\n2020-01-02,A,1\n2020-01-03,B,2\r\n");
  CHECK(p.tickers == std::vector<std::string>{"A", "B"});
  REQUIRE(p.n_dates() == 3);
  CHECK(format_date(p.dates[0]) == "2020-01-02");
  CHECK(p.has_price(0, 0));
  CHECK_FALSE(p.has_price(0, 1));
  CHECK(p.prices(1, 2) == 3.0);
}

TEST_CASE("malformed price rows name their line") {
  CHECK(error_line<ParseError>(kHeader + "2020-01-02,X,1\n2020-01-03,X,-5\n") == 3);
  CHECK(error_line<ParseError>(kHeader + "2020-01-02,X,0\n") == 2);
  CHECK(error_line<ParseError>(kHeader + "2020-01-02,X\n") == 2);
  CHECK(error_line<ParseError>(kHeader + "2020-01-02,X,1,2\n") == 2);
  CHECK(error_line<ParseError>(kHeader + "2020-13-02,X,1\n") == 2);
  CHECK(error_line<ParseError>(kHeader + "2020-01-02,X,abc\n") == 2);
  CHECK(error_line<ParseError>(kHeader + "2020-01-02,X,nan\n") == 2);
  CHECK(error_line<ParseError>(kHeader + "2020-01-02,X Y,1\n") == 2);
  CHECK(error_line<ParseError>("date,ticker,price\n") == 1);
}

TEST_CASE("duplicate (date, ticker) is a duplicate-key error") {
  CHECK(error_line<DuplicateKeyError>(kHeader + "2020-01-02,X,1\n2020-01-03,X,1\n2020-01-02,X,2\n") ==
        4);
}

TEST_CASE("dividends attach to priced cells") {
  const std::string prices = kHeader + "2020-01-02,A,10\n2020-01-03,A,11\n2020-01-03,B,5\n";
  const auto p = panel_from(prices, "date,ticker,amount\n2020-01-03,A,2.0\n");
  REQUIRE(p.dividends.size() == 1);
  CHECK(p.dividends.at(DividendKey{0, 1}) == 2.0);

  CHECK(panel_from(prices) == panel_from(kHeader + "2020-01-02,A,10\n2020-01-03,A,11\n2020-01-03,B,5\n"));
  CHECK(panel_from(prices, "date,ticker,amount\n2020-01-03,A,0\n").dividends.empty());

  CHECK_THROWS_AS(panel_from(prices, "date,ticker,amount\n2020-01-02,B,1\n"), ReferenceError);
  CHECK_THROWS_AS(panel_from(prices, "date,ticker,amount\n2020-01-04,A,1\n"), ReferenceError);
  CHECK_THROWS_AS(panel_from(prices, "date,ticker,amount\n2020-01-03,Z,1\n"), ReferenceError);
  CHECK_THROWS_AS(panel_from(prices, "date,ticker,amount\n2020-01-03,A,-1\n"), ParseError);
  CHECK_THROWS_AS(panel_from(prices, "date,ticker,amount\n2020-01-03,A,1\n2020-01-03,A,1\n"),
                  DuplicateKeyError);
}

TEST_CASE("filter_complete keeps fully observed tickers") {
  const auto p = panel_from(ten_days(), "date,ticker,amount\n2021-03-05,BBB,1\n2021-03-05,CCC,1\n");
  const auto f = filter_complete(p);
  CHECK(f.panel.tickers == std::vector<std::string>{"AAA", "BBB"});
  REQUIRE(f.dropped.size() == 1);
  CHECK(f.dropped[0].ticker == "CCC");
  CHECK(f.dropped[0].missing_days == 2);
  CHECK(f.panel.n_dates() == 10);
  CHECK(f.panel.prices.row(1) == p.prices.row(1));
  REQUIRE(f.panel.dividends.size() == 1);
  CHECK(f.panel.dividends.at(DividendKey{1, 4}) == 1.0);

  SUBCASE("idempotent") {
    const auto g = filter_complete(f.panel);
    CHECK(g.panel == f.panel);
    CHECK(g.dropped.empty());
  }
  SUBCASE("identity on complete input") { CHECK(filter_complete(f.panel).panel == f.panel); }
}

TEST_CASE("filter_complete on an all-incomplete panel") {
  CHECK_THROWS_AS(filter_complete(panel_from(kHeader + "2020-01-02,A,1\n2020-01-03,B,1\n")),
                  EmptyUniverseError);
}

TEST_CASE("parse, write, parse round-trips") {
  const auto p = panel_from(ten_days(), "date,ticker,amount\n2021-03-02,AAA,0.125\n2021-03-09,CCC,3\n");
  std::ostringstream prices, dividends;
  write_prices(prices, p);
  write_dividends(dividends, p);
  const auto q = panel_from(prices.str(), dividends.str());
  CHECK(q == p);

  auto s = support::spec(3, 6, 40);
  s.periodic_dividend = PeriodicDividend{7, 0.01};
  const auto market = generate(s);
  CHECK_FALSE(market.panel.dividends.empty());
  std::ostringstream mp, md;
  write_prices(mp, market.panel);
  write_dividends(md, market.panel);
  CHECK(panel_from(mp.str(), md.str()) == market.panel);
}
