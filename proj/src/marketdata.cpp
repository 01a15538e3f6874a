#include "statarb/marketdata.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "statarb/error.hpp"

namespace statarb {

Eigen::Index PricePanel::ticker_index(const std::string& ticker) const {
  auto it = std::find(tickers.begin(), tickers.end(), ticker);
  return it == tickers.end() ? -1 : static_cast<Eigen::Index>(it - tickers.begin());
}

ReturnsPanel ReturnsPanel::slice(Eigen::Index begin, Eigen::Index count) const {
  if (begin < 0 || count < 0 || begin + count > periods()) {
    fail(ErrorKind::Dimension, "returns slice out of range");
  }
  ReturnsPanel out;
  out.dates.assign(dates.begin() + begin, dates.begin() + begin + count);
  out.tickers = tickers;
  out.returns = returns.middleRows(begin, count);
  out.dt = dt;
  if (benchmark_returns) out.benchmark_returns = benchmark_returns->segment(begin, count);
  return out;
}

namespace {

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

PricePanel build_panel(const std::vector<std::string>& lines,
                       const std::optional<std::string>& benchmark) {
  if (lines.empty()) fail(ErrorKind::Parse, "line 1: missing header");
  {
    auto header = split_csv_line(lines[0]);
    for (auto& h : header) h = trim(h);
    if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
    if (header != std::vector<std::string>{"date", "ticker", "adj_close"}) {
      fail(ErrorKind::Parse, "line 1: expected header 'date,ticker,adj_close'");
    }
  }

  std::map<std::string, std::map<Date, double>> series;
  std::set<Date> all_dates;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string line_no = "line " + std::to_string(i + 1);
    if (trim(lines[i]).empty()) continue;
    auto fields = split_csv_line(lines[i]);
    if (fields.size() != 3) fail(ErrorKind::Parse, line_no + ": expected 3 fields");
    auto date = parse_date(trim(fields[0]));
    if (!date) fail(ErrorKind::Parse, line_no + ": bad date '" + fields[0] + "'");
    std::string ticker = trim(fields[1]);
    if (ticker.empty()) fail(ErrorKind::Parse, line_no + ": empty ticker");
    auto price = parse_double(fields[2]);
    if (!price) fail(ErrorKind::Parse, line_no + ": bad price '" + fields[2] + "'");
    if (!(*price > 0.0) || !std::isfinite(*price)) {
      fail(ErrorKind::Data, line_no + ": non-positive price for " + ticker);
    }
    auto [it, inserted] = series[ticker].emplace(*date, *price);
    if (!inserted) fail(ErrorKind::Data, line_no + ": duplicate row for " + ticker);
    all_dates.insert(*date);
  }

  PricePanel panel;
  panel.dates.assign(all_dates.begin(), all_dates.end());
  const std::size_t n = panel.dates.size();

  auto full_series = [&](const std::map<Date, double>& s) {
    Vector v(static_cast<Eigen::Index>(n));
    std::size_t k = 0;
    for (const auto& [date, price] : s) v(static_cast<Eigen::Index>(k++)) = price;
    return v;
  };

  std::vector<Vector> columns;
  for (const auto& [ticker, s] : series) {
    if (benchmark && ticker == *benchmark) continue;
    if (s.size() != n) continue;
    panel.tickers.push_back(ticker);
    columns.push_back(full_series(s));
  }
  if (benchmark) {
    auto it = series.find(*benchmark);
    if (it == series.end()) fail(ErrorKind::Data, "benchmark " + *benchmark + " not in file");
    if (it->second.size() != n) {
      fail(ErrorKind::Data, "benchmark " + *benchmark + " lacks full history");
    }
    panel.benchmark = Benchmark{*benchmark, full_series(it->second)};
  }
  if (n == 0 || columns.empty()) {
    fail(ErrorKind::EmptyPanel, "no ticker has a full-length history");
  }
  panel.prices.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    panel.prices.col(static_cast<Eigen::Index>(j)) = columns[j];
  }
  return panel;
}

}  // namespace

PricePanel load_prices(const std::filesystem::path& path, const std::optional<std::string>& benchmark) {
  return build_panel(read_lines(path), benchmark);
}

PricePanel parse_prices(const std::string& text, const std::optional<std::string>& benchmark) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return build_panel(lines, benchmark);
}

void write_prices(const PricePanel& panel, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "date,ticker,adj_close\n";
  for (std::size_t t = 0; t < panel.dates.size(); ++t) {
    const std::string date = format_date(panel.dates[t]);
    const auto row = static_cast<Eigen::Index>(t);
    for (std::size_t j = 0; j < panel.tickers.size(); ++j) {
      out << date << ',' << panel.tickers[j] << ','
          << format_double(panel.prices(row, static_cast<Eigen::Index>(j))) << '\n';
    }
    if (panel.benchmark) {
      out << date << ',' << panel.benchmark->ticker << ','
          << format_double(panel.benchmark->prices(row)) << '\n';
    }
  }
  write_text(path, out.str());
}

ReturnsPanel to_returns(const PricePanel& panel, double dt) {
  if (!(dt > 0.0)) fail(ErrorKind::Config, "dt must be positive");
  const Eigen::Index n = panel.prices.rows();
  if (n < 2) fail(ErrorKind::InsufficientData, "need at least 2 dates to form returns");
  ReturnsPanel out;
  out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
  out.tickers = panel.tickers;
  out.dt = dt;
  out.returns = (panel.prices.bottomRows(n - 1).array() / panel.prices.topRows(n - 1).array() - 1.0).matrix();
  if (panel.benchmark) {
    const Vector& p = panel.benchmark->prices;
    out.benchmark_returns = (p.tail(n - 1).array() / p.head(n - 1).array() - 1.0).matrix();
  }
  return out;
}

void write_returns(const ReturnsPanel& returns, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "date";
  for (const auto& t : returns.tickers) out << ',' << t;
  out << '\n';
  for (Eigen::Index t = 0; t < returns.periods(); ++t) {
    out << format_date(returns.dates[static_cast<std::size_t>(t)]);
    for (Eigen::Index j = 0; j < returns.returns.cols(); ++j) {
      out << ',' << format_double(returns.returns(t, j));
    }
    out << '\n';
  }
  write_text(path, out.str());
}

SurvivorshipAdjustment survivorship_adjust(const ReturnsPanel& returns,
                                           const Vector& principal_factor_returns,
                                           const Vector& benchmark_returns, double dt) {
  const Eigen::Index n = returns.periods();
  if (principal_factor_returns.size() != n || benchmark_returns.size() != n) {
    fail(ErrorKind::Dimension, "survivorship_adjust: series lengths must equal the returns length");
  }
  if (n < 3) fail(ErrorKind::InsufficientData, "survivorship_adjust: need at least 3 periods");
  const double xbar = benchmark_returns.mean();
  const double ybar = principal_factor_returns.mean();
  const Vector xc = benchmark_returns.array() - xbar;
  const Vector yc = principal_factor_returns.array() - ybar;
  const double sxx = xc.squaredNorm();
  if (!(sxx > 0.0)) {
    fail(ErrorKind::RegressionDegenerate, "survivorship_adjust: benchmark returns have zero variance");
  }
  SurvivorshipAdjustment out;
  out.beta_b = xc.dot(yc) / sxx;
  const double intercept = ybar - out.beta_b * xbar;
  out.alpha_b = intercept / dt;
  out.adjusted = returns;
  out.adjusted.returns.array() -= intercept;
  return out;
}

}  // namespace statarb
