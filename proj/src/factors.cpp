#include "statarb/factors.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "statarb/error.hpp"

namespace statarb {

Correlation correlation_matrix(const Matrix& returns, const std::vector<std::string>& tickers) {
  const Eigen::Index n = returns.rows();
  const Eigen::Index d = returns.cols();
  if (n < 2) fail(ErrorKind::InsufficientData, "correlation needs at least 2 observations");
  Matrix centered = returns.rowwise() - returns.colwise().mean();
  Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);
  Correlation out;
  out.sigma.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(cov(i, i) > 0.0)) {
      const std::string name = static_cast<std::size_t>(i) < tickers.size()
                                   ? tickers[static_cast<std::size_t>(i)]
                                   : "column " + std::to_string(i);
      fail(ErrorKind::DegenerateColumn, "zero-variance returns for " + name);
    }
    out.sigma(i) = std::sqrt(cov(i, i));
  }
  const Vector inv = out.sigma.cwiseInverse();
  out.rho = inv.asDiagonal() * cov * inv.asDiagonal();
  out.rho = symmetrized(out.rho);
  for (Eigen::Index i = 0; i < d; ++i) {
    out.rho(i, i) = 1.0;
    for (Eigen::Index j = 0; j < d; ++j) out.rho(i, j) = std::clamp(out.rho(i, j), -1.0, 1.0);
  }
  return out;
}

Correlation correlation_matrix(const ReturnsPanel& returns) {
  return correlation_matrix(returns.returns, returns.tickers);
}

EigenFactorSet eigenportfolios(const Matrix& rho, const Vector& sigma, Eigen::Index m) {
  const Eigen::Index d = rho.rows();
  if (rho.cols() != d || sigma.size() != d) fail(ErrorKind::Dimension, "eigenportfolios: shape mismatch");
  if (m < 1 || m > d) {
    fail(ErrorKind::Dimension, "eigenportfolios: need 1 <= m <= d, got m=" + std::to_string(m) +
                                   " d=" + std::to_string(d));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(rho));
  if (es.info() != Eigen::Success) fail(ErrorKind::Numeric, "eigenportfolios: eigen-decomposition failed");

  Matrix vecs = es.eigenvectors();
  Vector vals = es.eigenvalues();
  for (Eigen::Index j = 0; j < d; ++j) {
    // deterministic sign: positive sum, or positive first nonzero entry when the sum vanishes
    double s = vecs.col(j).sum();
    if (std::abs(s) < 1e-12) {
      for (Eigen::Index i = 0; i < d; ++i) {
        if (std::abs(vecs(i, j)) > 1e-12) {
          s = vecs(i, j);
          break;
        }
      }
    }
    if (s < 0.0) vecs.col(j) = -vecs.col(j);
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (vals(a) != vals(b)) return vals(a) > vals(b);
    return vecs(0, a) > vecs(0, b);
  });

  EigenFactorSet out;
  out.weights.resize(d, m);
  out.eigenvalues.resize(m);
  out.normalizers.resize(m);
  out.eigenvectors.resize(d, m);
  const Vector inv_sigma = sigma.cwiseInverse();
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Index k = order[static_cast<std::size_t>(j)];
    const Vector scaled = inv_sigma.cwiseProduct(vecs.col(k));
    const double c = scaled.sum();
    if (std::abs(c) <= 1e-10 * scaled.cwiseAbs().sum()) {
      fail(ErrorKind::Normalization, "eigenportfolio " + std::to_string(j + 1) + " has zero net weight");
    }
    out.eigenvalues(j) = vals(k);
    out.normalizers(j) = c;
    out.eigenvectors.col(j) = vecs.col(k);
    out.weights.col(j) = scaled / c;
  }
  return out;
}

Matrix factor_return_series(const Matrix& weights, const Matrix& returns) {
  if (weights.rows() != returns.cols()) {
    fail(ErrorKind::Dimension, "factor_return_series: weights have " + std::to_string(weights.rows()) +
                                   " rows but returns have " + std::to_string(returns.cols()) + " columns");
  }
  return returns * weights;
}

EigenFactorSet build_factors(const ReturnsPanel& returns, Eigen::Index m) {
  Correlation corr = correlation_matrix(returns);
  EigenFactorSet f = eigenportfolios(corr.rho, corr.sigma, m);
  f.factor_returns = factor_return_series(f.weights, returns.returns);
  return f;
}

void write_weights(const EigenFactorSet& factors, const std::vector<std::string>& tickers,
                   const std::filesystem::path& path) {
  if (static_cast<Eigen::Index>(tickers.size()) != factors.weights.rows()) {
    fail(ErrorKind::Dimension, "write_weights: ticker count mismatch");
  }
  std::ostringstream out;
  out << "ticker";
  for (Eigen::Index j = 0; j < factors.weights.cols(); ++j) out << ",omega_" << (j + 1);
  out << '\n';
  for (std::size_t i = 0; i < tickers.size(); ++i) {
    out << tickers[i];
    for (Eigen::Index j = 0; j < factors.weights.cols(); ++j) {
      out << ',' << format_double(factors.weights(static_cast<Eigen::Index>(i), j));
    }
    out << '\n';
  }
  write_text(path, out.str());
}

}  // namespace statarb
