#include "statarb/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <complex>

#include "statarb/error.hpp"

namespace statarb {

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

double asymmetry(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

Eigen::Index numeric_rank(const Matrix& a, double rel_tol, double reference) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double threshold = rel_tol * std::max(s(0), reference);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) ++rank;
  }
  return rank;
}

Matrix psd_sqrt(const Matrix& a, double clip) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(a));
  Vector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    ev(i) = ev(i) > clip ? std::sqrt(ev(i)) : 0.0;
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Matrix spd_inverse(const Matrix& a) {
  Eigen::LLT<Matrix> llt(symmetrized(a));
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::Conditioning, "matrix is not positive definite");
  }
  Matrix inv = llt.solve(Matrix::Identity(a.rows(), a.cols()));
  return symmetrized(inv);
}

Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c) {
  using CMatrix = Eigen::MatrixXcd;
  using CVector = Eigen::VectorXcd;
  const Eigen::Index n = a.rows();
  const Eigen::Index k = b.rows();
  if (a.cols() != n || b.cols() != k || c.rows() != n || c.cols() != k) {
    fail(ErrorKind::Dimension, "sylvester: inconsistent dimensions");
  }
  Eigen::ComplexSchur<Matrix> sa(a);
  Eigen::ComplexSchur<Matrix> sb(b);
  const CMatrix& ua = sa.matrixU();
  const CMatrix& ta = sa.matrixT();
  const CMatrix& ub = sb.matrixU();
  const CMatrix& tb = sb.matrixT();

  CMatrix f = ua.adjoint() * c.cast<std::complex<double>>() * ub;
  CMatrix y(n, k);
  const double scale = std::max(1.0, a.norm() + b.norm());
  for (Eigen::Index j = 0; j < k; ++j) {
    CVector rhs = f.col(j);
    for (Eigen::Index i = 0; i < j; ++i) rhs -= tb(i, j) * y.col(i);
    CMatrix lhs = ta;
    for (Eigen::Index i = 0; i < n; ++i) {
      lhs(i, i) += tb(j, j);
      if (std::abs(lhs(i, i)) < 1e-14 * scale) {
        fail(ErrorKind::Numeric, "sylvester: spectra of the two coefficients overlap");
      }
    }
    y.col(j) = lhs.triangularView<Eigen::Upper>().solve(rhs);
  }
  return (ua * y * ub.adjoint()).real();
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& rhs) {
  Matrix x = solve_sylvester(a.transpose(), a, rhs);
  if (asymmetry(rhs) == 0.0) x = symmetrized(x);
  return x;
}

namespace {

// Appends the directions of w not already in span(q) to q; returns how many were added.
Eigen::Index extend_basis(Matrix& q, Matrix w, double threshold) {
  for (int pass = 0; pass < 2 && q.cols() > 0; ++pass) {
    w -= q * (q.transpose() * w);
  }
  if (w.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(w, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  Eigen::Index added = 0;
  while (added < s.size() && s(added) > threshold) ++added;
  if (added == 0) return 0;
  const Eigen::Index old = q.cols();
  q.conservativeResize(q.rows(), old + added);
  q.rightCols(added) = svd.matrixU().leftCols(added);
  return added;
}

}  // namespace

Eigen::Index controllable_dimension(const Matrix& a, const Matrix& b, double rel_tol) {
  const Eigen::Index n = a.rows();
  Matrix q(n, 0);
  const double bnorm = b.size() ? b.norm() : 0.0;
  if (bnorm == 0.0) return 0;
  Eigen::Index added = extend_basis(q, b, rel_tol * bnorm);
  const double anorm = a.norm();
  if (anorm == 0.0) return q.cols();
  while (added > 0 && q.cols() < n) {
    Matrix w = a * q.rightCols(added);
    added = extend_basis(q, w, rel_tol * anorm);
  }
  return q.cols();
}

bool is_hurwitz(const Matrix& a) {
  if (a.size() == 0) return true;
  Eigen::EigenSolver<Matrix> es(a, false);
  return (es.eigenvalues().real().array() < 0.0).all();
}

Matrix covariance(const Matrix& x) { return cross_covariance(x, x); }

Matrix cross_covariance(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) fail(ErrorKind::Dimension, "cross_covariance: row mismatch");
  if (x.rows() == 0) fail(ErrorKind::InsufficientData, "cross_covariance: no observations");
  const double n = static_cast<double>(x.rows());
  Matrix xc = x.rowwise() - x.colwise().mean();
  Matrix yc = y.rowwise() - y.colwise().mean();
  return xc.transpose() * yc / n;
}

}  // namespace statarb
