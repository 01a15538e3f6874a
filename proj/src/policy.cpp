#include "statarb/policy.hpp"

#include <cmath>
#include <sstream>

#include "statarb/error.hpp"

namespace statarb {

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::OptimalUnconstrained: return "optimal_unconstrained";
    case PolicyKind::MyopicUnconstrained: return "myopic_unconstrained";
    case PolicyKind::OptimalNeutral: return "optimal_neutral";
    case PolicyKind::MyopicNeutral: return "myopic_neutral";
  }
  return "unknown";
}

bool is_optimal(PolicyKind kind) {
  return kind == PolicyKind::OptimalUnconstrained || kind == PolicyKind::OptimalNeutral;
}

bool is_neutral(PolicyKind kind) {
  return kind == PolicyKind::OptimalNeutral || kind == PolicyKind::MyopicNeutral;
}

Variant variant_of(PolicyKind kind) { return is_neutral(kind) ? Variant::Constrained : Variant::Unconstrained; }

ControlPolicy::ControlPolicy(PolicyKind kind, ModelParams params, std::optional<HJBSolution> solution)
    : kind_(kind), params_(std::make_shared<const ModelParams>(std::move(params))) {
  const ModelParams& p = *params_;
  if (!(p.gamma < 0.0)) fail(ErrorKind::UnsupportedRegime, "gamma must be negative");
  precision_ = precision_matrix(p, variant_of(kind));
  scale_ = 1.0 / (1.0 - p.gamma);
  offset_ = p.mu;
  slope_ = -Matrix(p.delta_matrix());
  if (is_optimal(kind)) {
    if (!solution) fail(ErrorKind::Config, std::string(to_string(kind)) + " policy needs an HJB solution");
    if (solution->variant != variant_of(kind)) {
      fail(ErrorKind::Config, std::string(to_string(kind)) + " policy given a " + to_string(solution->variant) +
                                  " solution");
    }
    if (solution->C_bar.rows() != p.d || solution->b_bar.size() != p.d) {
      fail(ErrorKind::Dimension, "HJB solution does not match the model dimension");
    }
    offset_ += p.sigma2 * solution->b_bar;
    slope_ += 2.0 * p.sigma2 * solution->C_bar;
    solution_ = std::move(solution);
  }
  if (is_neutral(kind)) {
    neutral_basis_ = p.sigma1_inverse() * p.beta;
    neutral_gram_pinv_ = (p.beta.transpose() * neutral_basis_).completeOrthogonalDecomposition().pseudoInverse();
  }
}

Vector ControlPolicy::control(const Vector& z) const {
  if (z.size() != params_->d) fail(ErrorKind::Dimension, "control: z has wrong length");
  Vector pi = scale_ * (precision_ * (offset_ + slope_ * z));
  if (neutral_basis_.size() > 0) {
    // re-project onto beta' pi = 0
    pi -= neutral_basis_ * (neutral_gram_pinv_ * (params_->beta.transpose() * pi));
  }
  return pi;
}

Matrix ControlPolicy::slope() const { return scale_ * precision_ * slope_; }

namespace {

std::string period_label(const WealthOptions& o, Eigen::Index t) {
  if (static_cast<std::size_t>(t) < o.dates.size()) return format_date(o.dates[static_cast<std::size_t>(t)]);
  return "period " + std::to_string(t);
}

void step_wealth(WealthPath& out, Eigen::Index t, const Vector& pi, const Matrix& returns, double r, double dt,
                 const WealthOptions& options) {
  const double invested = pi.sum();
  const double growth = 1.0 + pi.dot(returns.row(t).transpose()) + r * (1.0 - invested) * dt;
  out.weights_history.row(t) = pi.transpose();
  out.cash_weight_history(t) = 1.0 - invested;
  out.wealth(t + 1) = out.wealth(t) * growth;
  if (!(out.wealth(t + 1) > 0.0)) {
    fail(ErrorKind::Bankruptcy, "wealth fell to " + std::to_string(out.wealth(t + 1)) + " on " +
                                    period_label(options, t + 1));
  }
}

WealthPath start_path(Eigen::Index n, Eigen::Index d, const WealthOptions& options) {
  if (!(options.w0 > 0.0)) fail(ErrorKind::Config, "initial wealth must be positive");
  if (!options.dates.empty() && static_cast<Eigen::Index>(options.dates.size()) != n + 1) {
    fail(ErrorKind::Dimension, "wealth dates must have one more entry than return rows");
  }
  WealthPath out;
  out.dates = options.dates;
  out.tickers = options.tickers;
  out.wealth.resize(n + 1);
  out.wealth(0) = options.w0;
  out.weights_history.resize(n, d);
  out.cash_weight_history.resize(n);
  return out;
}

}  // namespace

WealthPath simulate_wealth(const ControlPolicy& policy, const Matrix& z_path, const Matrix& stock_returns,
                           double r, double dt, const WealthOptions& options) {
  const Eigen::Index n = stock_returns.rows();
  const Eigen::Index d = policy.params().d;
  if (stock_returns.cols() != d) fail(ErrorKind::Dimension, "simulate_wealth: returns width differs from d");
  if (z_path.rows() < n || z_path.cols() != d) {
    fail(ErrorKind::Dimension, "simulate_wealth: z_path rows must align with return rows");
  }
  WealthPath out = start_path(n, d, options);
  for (Eigen::Index t = 0; t < n; ++t) {
    step_wealth(out, t, policy.control(z_path.row(t).transpose()), stock_returns, r, dt, options);
  }
  return out;
}

WealthPath wealth_from_weights(const Matrix& weights, const Matrix& stock_returns, double r, double dt,
                               const WealthOptions& options) {
  const Eigen::Index n = stock_returns.rows();
  if (weights.rows() != n || weights.cols() != stock_returns.cols()) {
    fail(ErrorKind::Dimension, "wealth_from_weights: weights shape differs from returns");
  }
  WealthPath out = start_path(n, stock_returns.cols(), options);
  for (Eigen::Index t = 0; t < n; ++t) {
    step_wealth(out, t, weights.row(t).transpose(), stock_returns, r, dt, options);
  }
  return out;
}

void write_wealth(const WealthPath& path, const std::filesystem::path& file) {
  const Eigen::Index n = path.weights_history.rows();
  const Eigen::Index d = path.weights_history.cols();
  std::ostringstream out;
  out << "date,wealth,cash_weight";
  for (Eigen::Index i = 0; i < d; ++i) {
    if (static_cast<std::size_t>(i) < path.tickers.size()) out << ",pi_" << path.tickers[static_cast<std::size_t>(i)];
    else out << ",pi_" << (i + 1);
  }
  out << '\n';
  for (Eigen::Index t = 0; t < path.wealth.size(); ++t) {
    if (static_cast<std::size_t>(t) < path.dates.size()) out << format_date(path.dates[static_cast<std::size_t>(t)]);
    else out << t;
    out << ',' << format_double(path.wealth(t));
    if (t < n) {
      out << ',' << format_double(path.cash_weight_history(t));
      for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(path.weights_history(t, i));
    } else {
      out << ',';
      for (Eigen::Index i = 0; i < d; ++i) out << ',';
    }
    out << '\n';
  }
  write_text(file, out.str());
}

WealthPath load_wealth(const std::filesystem::path& file) {
  const auto lines = read_lines(file);
  if (lines.empty()) fail(ErrorKind::Parse, file.string() + ": empty wealth file");
  const auto header = split_csv_line(lines[0]);
  if (header.size() < 3 || header[0] != "date" || header[1] != "wealth" || header[2] != "cash_weight") {
    fail(ErrorKind::Parse, file.string() + ": line 1: unexpected wealth header");
  }
  const Eigen::Index d = static_cast<Eigen::Index>(header.size()) - 3;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    rows.push_back(split_csv_line(lines[i]));
    if (static_cast<Eigen::Index>(rows.back().size()) != d + 3) {
      fail(ErrorKind::Parse, file.string() + ": line " + std::to_string(i + 1) + ": wrong field count");
    }
  }
  const Eigen::Index total = static_cast<Eigen::Index>(rows.size());
  if (total < 1) fail(ErrorKind::Parse, file.string() + ": no wealth rows");
  WealthPath path;
  path.wealth.resize(total);
  path.weights_history.resize(total - 1, d);
  path.cash_weight_history.resize(total - 1);
  for (Eigen::Index i = 0; i < d; ++i) {
    const std::string& h = header[static_cast<std::size_t>(i + 3)];
    path.tickers.push_back(h.rfind("pi_", 0) == 0 ? h.substr(3) : h);
  }
  bool dated = true;
  for (Eigen::Index t = 0; t < total; ++t) {
    const auto& f = rows[static_cast<std::size_t>(t)];
    auto date = parse_date(f[0]);
    if (date && dated) path.dates.push_back(*date);
    else dated = false;
    auto parse = [&](const std::string& s) {
      auto v = parse_double(s);
      if (!v) fail(ErrorKind::Parse, file.string() + ": line " + std::to_string(t + 2) + ": bad number '" + s + "'");
      return *v;
    };
    path.wealth(t) = parse(f[1]);
    if (t < total - 1) {
      path.cash_weight_history(t) = parse(f[2]);
      for (Eigen::Index i = 0; i < d; ++i) path.weights_history(t, i) = parse(f[static_cast<std::size_t>(i + 3)]);
    }
  }
  if (!dated) path.dates.clear();
  return path;
}

}  // namespace statarb
