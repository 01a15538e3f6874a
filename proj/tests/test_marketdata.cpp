#include <doctest.h>

#include <functional>
#include <string>

#include "statarb/error.hpp"
#include "statarb/marketdata.hpp"
#include "support.hpp"

using namespace statarb;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

std::string error_text(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("three rows of one ticker") {
  const auto p = parse_prices("date,ticker,adj_close\n2020-01-02,AAA,10\n2020-01-03,AAA,11\n2020-01-06,AAA,12\n");
  CHECK(p.dates.size() == 3);
  REQUIRE(p.tickers.size() == 1);
  CHECK(p.prices(2, 0) == 12.0);
  CHECK(format_date(p.dates[2]) == "2020-01-06");
}

TEST_CASE("ticker missing a middle date is dropped") {
  const auto p = parse_prices(
      "date,ticker,adj_close\n"
      "2020-01-02,AAA,10\n2020-01-02,BBB,5\n"
      "2020-01-03,AAA,11\n"
      "2020-01-06,AAA,12\n2020-01-06,BBB,6\n");
  REQUIRE(p.tickers.size() == 1);
  CHECK(p.tickers[0] == "AAA");
  CHECK(p.dates.size() == 3);
}

TEST_CASE("price validation and parse errors carry line numbers") {
  CHECK(kind_of([] { parse_prices("date,ticker,adj_close\n2020-01-02,AAA,0\n"); }) == ErrorKind::Data);
  CHECK(kind_of([] { parse_prices("date,ticker,adj_close\n2020-01-02,AAA,-1\n"); }) == ErrorKind::Data);
  CHECK(error_text([] { parse_prices("date,ticker,adj_close\n2020-01-02,AAA,1\n2020-13-02,AAA,1\n"); })
            .find("line 3") != std::string::npos);
  CHECK(kind_of([] { parse_prices("date,ticker,adj_close\n2020-01-02,AAA,x\n"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_prices("date,ticker,price\n"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_prices("date,ticker,adj_close\n2020-01-02,AAA,1\n2020-01-02,AAA,2\n"); }) ==
        ErrorKind::Data);
}

TEST_CASE("no full-history ticker gives an empty-panel error") {
  CHECK(kind_of([] {
          parse_prices("date,ticker,adj_close\n2020-01-02,AAA,1\n2020-01-03,BBB,1\n");
        }) == ErrorKind::EmptyPanel);
}

TEST_CASE("missing file names the path") {
  const std::string msg = error_text([] { load_prices("/nonexistent/prices.csv"); });
  CHECK(msg.find("/nonexistent/prices.csv") != std::string::npos);
}

TEST_CASE("benchmark is kept apart from the universe") {
  const auto p = parse_prices(
      "date,ticker,adj_close\n2020-01-02,AAA,10\n2020-01-02,SPY,100\n2020-01-03,AAA,11\n2020-01-03,SPY,101\n",
      std::string("SPY"));
  CHECK(p.tickers == std::vector<std::string>{"AAA"});
  REQUIRE(p.benchmark);
  CHECK(p.benchmark->prices(1) == 101.0);
  const auto r = to_returns(p);
  REQUIRE(r.benchmark_returns);
  CHECK((*r.benchmark_returns)(0) == doctest::Approx(0.01));
}

TEST_CASE("simple returns") {
  PricePanel p;
  p.dates = {Date{std::chrono::year{2020} / 1 / 2}, Date{std::chrono::year{2020} / 1 / 3},
             Date{std::chrono::year{2020} / 1 / 6}};
  p.tickers = {"A", "B", "C"};
  p.prices.resize(3, 3);
  p.prices << 100, 50, 100, 110, 50, 110, 110, 50, 99;
  const auto r = to_returns(p);
  CHECK(r.periods() == 2);
  CHECK(r.returns(0, 0) == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(r.returns(1, 0) == 0.0);
  CHECK(r.returns(0, 1) == 0.0);
  CHECK(r.returns(1, 1) == 0.0);
  CHECK(r.returns(1, 2) == doctest::Approx(-0.10).epsilon(1e-15));
  CHECK(r.dates.front() == p.dates[1]);

  PricePanel one = p;
  one.dates.resize(1);
  one.prices = p.prices.topRows(1);
  CHECK(kind_of([&] { to_returns(one); }) == ErrorKind::InsufficientData);
}

TEST_CASE("price file round trip") {
  testing::TempDir dir("md");
  const auto p = parse_prices(
      "date,ticker,adj_close\n2020-01-02,AAA,10.125\n2020-01-02,BBB,3\n2020-01-03,AAA,11\n2020-01-03,BBB,"
      "0.1\n");
  write_prices(p, dir / "p.csv");
  const auto q = load_prices(dir / "p.csv");
  CHECK(q.tickers == p.tickers);
  CHECK(q.prices == p.prices);
}

TEST_CASE("survivorship adjustment") {
  ReturnsPanel r;
  const Eigen::Index n = 50;
  r.returns.resize(n, 2);
  Vector bench(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    bench(t) = 0.01 * testing::weyl(t + 1);
    r.returns(t, 0) = 0.02 * testing::weyl(3 * t + 1);
    r.returns(t, 1) = 0.02 * testing::weyl(5 * t + 2);
  }
  const double dt = 1.0 / 252.0;

  SUBCASE("identical factor and benchmark leaves the panel unchanged") {
    const auto adj = survivorship_adjust(r, bench, bench, dt);
    CHECK(std::abs(adj.alpha_b) < 1e-12);
    CHECK((adj.adjusted.returns - r.returns).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("constant offset is removed from every return") {
    const double c = 0.0004;
    const Vector f = bench.array() + c;
    const auto adj = survivorship_adjust(r, f, bench, dt);
    CHECK(adj.alpha_b == doctest::Approx(c / dt).epsilon(1e-10));
    CHECK(adj.beta_b == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((r.returns.array() - c - adj.adjusted.returns.array()).abs().maxCoeff() < 1e-15);
  }
  SUBCASE("normal equations agree with the closed form") {
    Vector f(n);
    for (Eigen::Index t = 0; t < n; ++t) f(t) = 0.5 * bench(t) + 0.01 * testing::weyl(7 * t + 3) + 0.0002;
    const auto adj = survivorship_adjust(r, f, bench, dt);
    Matrix x(n, 2);
    x.col(0).setOnes();
    x.col(1) = bench;
    const Vector coef = (x.transpose() * x).ldlt().solve(x.transpose() * f);
    CHECK(adj.alpha_b * dt == doctest::Approx(coef(0)).epsilon(1e-9));
    CHECK(adj.beta_b == doctest::Approx(coef(1)).epsilon(1e-9));
  }
  SUBCASE("zero-variance benchmark") {
    CHECK(kind_of([&] { survivorship_adjust(r, bench, Vector::Zero(n), dt); }) == ErrorKind::RegressionDegenerate);
  }
}
