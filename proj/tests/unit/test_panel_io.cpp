#include <cmath>
#include <limits>
#include <sstream>

#include "amf/error.hpp"
#include "amf/io.hpp"
#include "amf/panel.hpp"
#include "doctest.h"

using namespace amf;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an amf::Error");
  return ErrorCode::kInvalidArgument;
}

ReturnsPanel parse(const std::string& text, Layout layout = Layout::kWide) {
  std::istringstream in(text);
  return parse_panel(in, layout);
}

}  // namespace

TEST_CASE("CSV records and number formatting") {
  const auto f = io::split_csv_line("a,\"b,c\",\"d\"\"e\",\r");
  REQUIRE(f.size() == 4);
  CHECK(f[1] == "b,c");
  CHECK(f[2] == "d\"e");
  CHECK(f[3].empty());
  CHECK(io::csv_field("x,y") == "\"x,y\"");
  CHECK(code_of([] { io::split_csv_line("\"open"); }) == ErrorCode::kMalformedCsv);

  for (double v : {0.1, -1e-300, 1.0 / 3.0, 12345.678901234567}) {
    CHECK(*io::parse_double(io::format_double(v)) == v);
  }
  CHECK(io::format_fixed(12.3456, 2) == "12.35");
  CHECK_FALSE(io::parse_double("abc"));
}

TEST_CASE("key=value config files") {
  const auto file = io::KeyValueFile::parse("# comment\n a = 1 \n\nb=x,y\na=2\nflag=true\n");
  CHECK(file.get_int("a", 0) == 2);
  CHECK(file.get_bool("flag", false));
  CHECK(io::split_list(*file.get("b")) == std::vector<std::string>{"x", "y"});
  CHECK(file.unknown_keys({"a", "b"}) == std::vector<std::string>{"flag"});
  CHECK(code_of([] { io::KeyValueFile::parse("novalue\n"); }) == ErrorCode::kConfig);
  CHECK(code_of([&] { file.get_double("b", 0.0); }) == ErrorCode::kConfig);
}

TEST_CASE("wide and long layouts parse to the same panel") {
  const ReturnsPanel wide = parse("date,A,B\n2020-01-03,0.01,\n2020-01-10,0.02,-0.01\n");
  const ReturnsPanel lng = parse("date,asset,value\n2020-01-10,A,0.02\n2020-01-10,B,-0.01\n2020-01-03,A,0.01\n",
                                 Layout::kLong);
  CHECK(wide.assets == lng.assets);
  CHECK(wide.timestamps == lng.timestamps);
  CHECK_FALSE(wide.mask(0, 1));
  CHECK_FALSE(lng.mask(0, 1));
  CHECK(std::isnan(wide.values(0, 1)));
  CHECK(wide.values(1, 1) == -0.01);
  CHECK(lng.values(1, 0) == 0.02);

  std::ostringstream out;
  write_panel(out, wide);
  const ReturnsPanel again = parse(out.str());
  CHECK(again.values(1, 0) == wide.values(1, 0));
  CHECK_FALSE(again.mask(0, 1));
}

TEST_CASE("panel parse errors") {
  CHECK(code_of([] { parse("date,A,A\n2020,1,2\n"); }) == ErrorCode::kDuplicateCell);
  CHECK(code_of([] { parse("date,A\n2020,x\n2021,1\n"); }) == ErrorCode::kMalformedCsv);
  CHECK(code_of([] { parse("date,A\n2020,1\n2020,2\n"); }) == ErrorCode::kDuplicateCell);
  CHECK(code_of([] { parse("date,A\n"); }) == ErrorCode::kEmptyPanel);
  CHECK(code_of([] { parse("date,asset,value\n2020,A,1\n2020,A,2\n", Layout::kLong); }) ==
        ErrorCode::kDuplicateCell);
  CHECK(code_of([] { load_panel("/nonexistent/panel.csv", Layout::kWide); }) == ErrorCode::kIo);
}

TEST_CASE("coverage filter keeps the boundary") {
  const ReturnsPanel p = parse("date,A,B\n1,0.1,\n2,0.1,0.2\n3,0.1,\n4,0.1,0.3\n");
  CHECK(p.coverage(1) == 0.5);
  CHECK(filter_coverage(p, 0.5).num_assets() == 2);
  CHECK(filter_coverage(p, 0.51).num_assets() == 1);
}

TEST_CASE("excess returns subtract the risk-free rate on observed cells") {
  const ReturnsPanel p = parse("date,A,B\n1,0.1,\n2,0.2,0.3\n");
  RiskFreeSeries rf{{"1", "2"}, (Eigen::VectorXd(2) << 0.01, 0.02).finished()};
  const ReturnsPanel e = excess_returns(p, rf);
  CHECK(e.values(0, 0) == doctest::Approx(0.09));
  CHECK(e.values(1, 1) == doctest::Approx(0.28));
  CHECK_FALSE(e.mask(0, 1));
  RiskFreeSeries shifted{{"1", "3"}, rf.rate};
  CHECK(code_of([&] { excess_returns(p, shifted); }) == ErrorCode::kLengthMismatch);
}

TEST_CASE("adjusted prices, money market and first differences") {
  const ReturnsPanel p = parse("date,A,B\n1,0.1,\n2,-0.1,0.5\n");
  const std::vector<double> initial{1.0, 2.0};
  const PricePanel prices = adjusted_prices(p, initial);
  REQUIRE(prices.prices.rows() == 3);
  CHECK(prices.timestamps.front() == "init");
  CHECK(prices.prices(1, 0) == doctest::Approx(1.1));
  CHECK(prices.prices(2, 0) == doctest::Approx(0.99));
  CHECK(std::isnan(prices.prices(0, 1)));
  CHECK(prices.prices(1, 1) == 2.0);
  CHECK(prices.prices(2, 1) == doctest::Approx(3.0));

  const ReturnsPanel diff = first_differences(prices);
  CHECK(diff.timestamps == p.timestamps);
  CHECK(diff.values(0, 0) == doctest::Approx(0.1));
  CHECK(diff.values(1, 0) == doctest::Approx(-0.11));

  RiskFreeSeries rf{{"1", "2", "3"}, (Eigen::VectorXd(3) << 0.5, 1.0, 0.0).finished()};
  const Eigen::VectorXd b = money_market(rf);
  REQUIRE(b.size() == 3);
  CHECK(b(0) == 1.0);
  CHECK(b(1) == 1.5);
  CHECK(b(2) == 3.0);

  const ReturnsPanel gap = parse("date,A\n1,0.1\n2,\n3,0.1\n");
  CHECK(code_of([&] { adjusted_prices(gap, std::vector<double>{1.0}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { adjusted_prices(p, std::vector<double>{1.0, 0.0}); }) == ErrorCode::kNonPositivePrice);
  const ReturnsPanel wipe = parse("date,A\n1,-1\n2,0.1\n");
  CHECK(code_of([&] { adjusted_prices(wipe, std::vector<double>{1.0}); }) == ErrorCode::kNonPositivePrice);
}

TEST_CASE("basis universe and label files") {
  BasisUniverse u;
  u.panel = parse("date,MKT,E1\n1,0.1,0.2\n2,0.1,0.3\n");
  u.categories = {{"MKT", "equity"}};
  u.market_index = "MKT";
  CHECK(code_of([&] { u.validate(); }) == ErrorCode::kUnclassifiedEntity);
  u.categories["E1"] = "equity";
  u.market_index = "SPX";
  CHECK(code_of([&] { u.validate(); }) == ErrorCode::kMissingMarketIndex);

  std::istringstream in("asset,category\nE1,bond\n\"A,B\",fx\n");
  const auto labels = parse_labels(in);
  CHECK(labels.at("A,B") == "fx");
  CHECK(label_year("2011-W05") == 2011);
  CHECK(code_of([] { label_year("x1"); }) == ErrorCode::kInvalidArgument);
}
