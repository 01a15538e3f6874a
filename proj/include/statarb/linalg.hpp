#pragma once

#include <Eigen/Dense>

namespace statarb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

Matrix symmetrized(const Matrix& a);

/// Max absolute entry of a - a^T.
double asymmetry(const Matrix& a);

/// Extreme eigenvalues of the symmetric part of a.
double min_eigenvalue(const Matrix& a);
double max_eigenvalue(const Matrix& a);

/// Rank from singular values above rel_tol * max(largest singular value, reference).
/// A positive reference lets near-zero matrices report rank 0.
Eigen::Index numeric_rank(const Matrix& a, double rel_tol = 1e-10, double reference = 0.0);

/// Symmetric square root of a PSD matrix. Eigenvalues below clip are treated as zero.
Matrix psd_sqrt(const Matrix& a, double clip = 1e-12);

/// Inverse of an SPD matrix via Cholesky; throws Conditioning if not PD.
Matrix spd_inverse(const Matrix& a);

/// Solves a X + X b = c by Bartels-Stewart on complex Schur forms.
Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c);

/// Solves a^T X + X a = rhs; result symmetrized when rhs is symmetric.
Matrix solve_lyapunov(const Matrix& a, const Matrix& rhs);

/// Dimension of the Krylov subspace span{b, a b, a^2 b, ...}, built with
/// orthonormal bases so that powers of a never appear explicitly.
Eigen::Index controllable_dimension(const Matrix& a, const Matrix& b, double rel_tol = 1e-9);

/// True when every eigenvalue of a has strictly negative real part.
bool is_hurwitz(const Matrix& a);

/// Sample covariance with divisor n of the columns of x (rows are observations).
Matrix covariance(const Matrix& x);

/// Cross covariance with divisor n: cov(x_i, y_j) for columns of x and y.
Matrix cross_covariance(const Matrix& x, const Matrix& y);

}  // namespace statarb
