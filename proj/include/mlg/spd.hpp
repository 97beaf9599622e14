#pragma once

// Symmetric positive (semi-)definite helpers shared by every kernel path:
// thresholded eigendecompositions, Cholesky log-determinants with a single
// jitter retry, and the Bhattacharyya overlap ratio of two zero-mean
// Gaussians given by their covariance matrices.
//
// Free functions templated on the Eigen expression so callers can pass
// blocks, products or maps without materializing them first. Determinants
// are never formed directly; everything runs in log space.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "mlg/errors.hpp"

namespace mlg {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = DenseMatrix<double>;
using Vector = DenseVector<double>;

// Retained part of a thresholded symmetric eigendecomposition.
// values are sorted descending; vectors holds the matching columns with the
// sign fixed so the largest-magnitude entry of each column is positive.
template <typename Scalar>
struct SymEigT {
  DenseVector<Scalar> values;
  DenseMatrix<Scalar> vectors;
  Scalar cutoff = Scalar(0);        // absolute threshold that was applied
  Scalar min_eigenvalue = Scalar(0);  // smallest eigenvalue of the input
  Eigen::Index input_size = 0;
};

using SymEig = SymEigT<double>;

namespace detail {

// First nonpositive pivot of a plain lower Cholesky, or -1 if none.
// Only used to name the offending pivot in error messages.
template <typename Scalar>
int first_bad_pivot(const DenseMatrix<Scalar>& s) {
  const Eigen::Index n = s.rows();
  DenseMatrix<Scalar> l = DenseMatrix<Scalar>::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Scalar d = s(k, k) - l.row(k).head(k).squaredNorm();
    if (!(d > Scalar(0)) || !std::isfinite(static_cast<double>(d))) return static_cast<int>(k);
    l(k, k) = std::sqrt(d);
    for (Eigen::Index i = k + 1; i < n; ++i)
      l(i, k) = (s(i, k) - l.row(i).head(k).dot(l.row(k).head(k))) / l(k, k);
  }
  return -1;
}

}  // namespace detail

// Eigendecomposition of a symmetric matrix keeping eigenvalues above
// tau * lambda_max (tau is relative; nothing is kept when lambda_max <= 0).
// Throws invalid_input if k is not square or not symmetric within tolerance.
template <typename Derived>
SymEigT<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& k,
                                          typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  DenseMatrix<Scalar> m = k.derived();
  if (m.rows() != m.cols()) throw invalid_input("sym_eig: matrix must be square");
  SymEigT<Scalar> out;
  out.input_size = m.rows();
  if (m.rows() == 0) {
    out.values.resize(0);
    out.vectors.resize(0, 0);
    return out;
  }
  const Scalar scale = std::max(Scalar(1), m.cwiseAbs().maxCoeff());
  const Scalar asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > Scalar(1e-8) * scale)
    throw invalid_input("sym_eig: matrix is not symmetric (max asymmetry " +
                        std::to_string(static_cast<double>(asym)) + ")");
  m = ((m + m.transpose()) / Scalar(2)).eval();

  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(m);
  if (es.info() != Eigen::Success) throw invalid_input("sym_eig: eigensolver failed to converge");

  const Eigen::Index n = m.rows();
  const Scalar lambda_max = es.eigenvalues()(n - 1);
  out.min_eigenvalue = es.eigenvalues()(0);
  out.cutoff = tau * lambda_max;
  Eigen::Index kept = 0;
  if (lambda_max > Scalar(0)) {
    while (kept < n && es.eigenvalues()(n - 1 - kept) > out.cutoff) ++kept;
  }
  out.values.resize(kept);
  out.vectors.resize(n, kept);
  for (Eigen::Index j = 0; j < kept; ++j) {
    out.values(j) = es.eigenvalues()(n - 1 - j);
    DenseVector<Scalar> col = es.eigenvectors().col(n - 1 - j);
    // Deterministic sign: make the first largest-magnitude entry positive.
    Eigen::Index arg = 0;
    Scalar best = Scalar(-1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar a = std::abs(col(i));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (col(arg) < Scalar(0)) col = -col;
    out.vectors.col(j) = col;
  }
  return out;
}

// Cholesky factor of an SPD matrix with the standard recovery policy:
// on failure add (1e-12 * trace / p) * I once and retry; a second failure is
// a hard error naming the first nonpositive pivot.
template <typename Scalar>
class SpdFactorT {
 public:
  template <typename Derived>
  static SpdFactorT compute(const Eigen::MatrixBase<Derived>& s_expr,
                            const char* context = "spd factorization") {
    DenseMatrix<Scalar> s = s_expr.derived();
    if (s.rows() != s.cols()) throw invalid_input(std::string(context) + ": matrix must be square");
    SpdFactorT f;
    f.size_ = s.rows();
    if (f.size_ == 0) return f;
    f.llt_.compute(s);
    if (f.llt_.info() != Eigen::Success) {
      f.jitter_ = Scalar(1e-12) * s.trace() / Scalar(s.rows());
      DenseMatrix<Scalar> repaired =
          s + f.jitter_ * DenseMatrix<Scalar>::Identity(s.rows(), s.cols());
      f.llt_.compute(repaired);
      if (f.llt_.info() != Eigen::Success) {
        const int pivot = detail::first_bad_pivot<Scalar>(repaired);
        throw singular_matrix_error(std::string(context) +
                                        ": matrix is not positive definite (pivot " +
                                        std::to_string(pivot) + " failed after jitter retry)",
                                    pivot);
      }
    }
    return f;
  }

  Eigen::Index size() const { return size_; }
  Scalar jitter() const { return jitter_; }

  Scalar log_det() const {
    Scalar ld = Scalar(0);
    for (Eigen::Index i = 0; i < size_; ++i) ld += std::log(llt_.matrixLLT()(i, i));
    return Scalar(2) * ld;
  }

  template <typename Derived>
  DenseMatrix<Scalar> solve(const Eigen::MatrixBase<Derived>& b) const {
    if (size_ == 0) return DenseMatrix<Scalar>(0, b.cols());
    return llt_.solve(b.derived());
  }

  DenseMatrix<Scalar> inverse() const {
    return solve(DenseMatrix<Scalar>::Identity(size_, size_));
  }

 private:
  Eigen::LLT<DenseMatrix<Scalar>> llt_;
  Eigen::Index size_ = 0;
  Scalar jitter_ = Scalar(0);
};

using SpdFactor = SpdFactorT<double>;

// (log det S, S^{-1}) in one factorization.
template <typename Derived>
std::pair<typename Derived::Scalar, DenseMatrix<typename Derived::Scalar>> spd_logdet_and_inverse(
    const Eigen::MatrixBase<Derived>& s) {
  auto f = SpdFactorT<typename Derived::Scalar>::compute(s, "spd_logdet_and_inverse");
  return {f.log_det(), f.inverse()};
}

// Precomputed half of a Bhattacharyya ratio; build once per covariance and
// reuse across all pairings.
template <typename Scalar>
struct BhattTermT {
  DenseMatrix<Scalar> inverse;
  Scalar log_det = Scalar(0);
};

using BhattTerm = BhattTermT<double>;

template <typename Derived>
BhattTermT<typename Derived::Scalar> bhatt_term(const Eigen::MatrixBase<Derived>& s) {
  auto f = SpdFactorT<typename Derived::Scalar>::compute(s, "bhattacharyya_ratio");
  return {f.inverse(), f.log_det()};
}

// Overlap of two zero-mean Gaussians with covariances S1, S2:
//   det( (S1^{-1}/2 + S2^{-1}/2)^{-1} )^{1/2} / ( det(S1)^{1/4} det(S2)^{1/4} )
// evaluated entirely in log space. Equal arguments give 1; the value lies in
// (0, 1] for positive definite inputs. Empty (0 x 0) inputs give exactly 1.
template <typename Scalar>
Scalar bhattacharyya_ratio(const BhattTermT<Scalar>& a, const BhattTermT<Scalar>& b) {
  if (a.inverse.rows() != b.inverse.rows())
    throw invalid_input("bhattacharyya_ratio: dimension mismatch (" +
                        std::to_string(a.inverse.rows()) + " vs " +
                        std::to_string(b.inverse.rows()) + ")");
  if (a.inverse.rows() == 0) return Scalar(1);
  DenseMatrix<Scalar> mid = Scalar(0.5) * a.inverse + Scalar(0.5) * b.inverse;
  auto f = SpdFactorT<Scalar>::compute(mid, "bhattacharyya_ratio (midpoint)");
  // log det of the midpoint inverse is -log_det(mid); the two quarter terms
  // are added smallest-first so the result is bitwise symmetric in (a, b).
  const Scalar lo = std::min(a.log_det, b.log_det);
  const Scalar hi = std::max(a.log_det, b.log_det);
  return std::exp(Scalar(-0.5) * f.log_det() - Scalar(0.25) * lo - Scalar(0.25) * hi);
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar bhattacharyya_ratio(const Eigen::MatrixBase<DerivedA>& s1,
                                              const Eigen::MatrixBase<DerivedB>& s2) {
  return bhattacharyya_ratio(bhatt_term(s1), bhatt_term(s2));
}

}  // namespace mlg
