#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "statarb/linalg.hpp"
#include "statarb/marketdata.hpp"

namespace statarb {

struct Correlation {
  Matrix rho;
  Vector sigma;  // per-period standard deviations
};

/// Eigenportfolio weights, one column per factor, each summing to one.
struct EigenFactorSet {
  Matrix weights;        // d x m
  Vector eigenvalues;    // m, descending
  Vector normalizers;    // c_j = 1' sigma^-1 v_j
  Matrix eigenvectors;   // d x m, unit norm
  Matrix factor_returns; // n x m, empty until filled
};

Correlation correlation_matrix(const Matrix& returns, const std::vector<std::string>& tickers = {});
Correlation correlation_matrix(const ReturnsPanel& returns);

EigenFactorSet eigenportfolios(const Matrix& rho, const Vector& sigma, Eigen::Index m);

Matrix factor_return_series(const Matrix& weights, const Matrix& returns);

/// Correlation, eigenportfolios and in-sample factor returns in one step.
EigenFactorSet build_factors(const ReturnsPanel& returns, Eigen::Index m);

void write_weights(const EigenFactorSet& factors, const std::vector<std::string>& tickers,
                   const std::filesystem::path& path);

}  // namespace statarb
