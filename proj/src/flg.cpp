#include "mlg/flg.hpp"

#include <string>

namespace mlg {

void validate(const FlgParams& p) {
  if (!(p.eta > 0.0)) throw invalid_input("FlgParams: eta must be > 0");
  if (!(p.gamma > 0.0)) throw invalid_input("FlgParams: gamma must be > 0");
  if (!(p.tau >= 0.0)) throw invalid_input("FlgParams: tau must be >= 0");
}

Matrix s_matrix_explicit(const Matrix& u, const RegularizedLaplacian& lap, double gamma) {
  if (!(gamma > 0.0)) throw invalid_input("s_matrix_explicit: gamma must be > 0");
  if (u.cols() != lap.matrix.rows())
    throw invalid_input("s_matrix_explicit: U has " + std::to_string(u.cols()) +
                        " columns but the Laplacian is " + std::to_string(lap.matrix.rows()) +
                        "x" + std::to_string(lap.matrix.cols()));
  const auto f = SpdFactor::compute(lap.matrix, "regularized Laplacian");
  Matrix s = u * f.solve(u.transpose());
  s = ((s + s.transpose()) / 2.0).eval();  // kill factorization roundoff
  s.diagonal().array() += gamma;
  return s;
}

double flg_explicit(const Graph& g1, const Matrix& u1, const Graph& g2, const Matrix& u2,
                    const FlgParams& p) {
  validate(p);
  if (u1.rows() != u2.rows())
    throw invalid_input("flg_explicit: feature dimensions differ (" + std::to_string(u1.rows()) +
                        " vs " + std::to_string(u2.rows()) + ")");
  const Matrix s1 = s_matrix_explicit(u1, laplacian(g1, p.eta), p.gamma);
  const Matrix s2 = s_matrix_explicit(u2, laplacian(g2, p.eta), p.gamma);
  return bhattacharyya_ratio(s1, s2);
}

JointBasis joint_basis(const Matrix& k, double tau) {
  JointBasis jb;
  jb.eig = sym_eig(k, tau);
  const double lambda_max = jb.eig.values.size() > 0 ? jb.eig.values(0) : 0.0;
  if (jb.eig.min_eigenvalue < -1e-8 * std::max(lambda_max, 0.0))
    throw base_kernel_violation(
        "joint_basis: base kernel Gram matrix is not PSD (most negative eigenvalue " +
        std::to_string(jb.eig.min_eigenvalue) + ", largest " + std::to_string(lambda_max) + ")");
  jb.q = jb.eig.vectors * jb.eig.values.cwiseSqrt().asDiagonal();
  return jb;
}

double flg_from_gram(const GraphFactor& f1, const GraphFactor& f2, const Matrix& k,
                     const FlgParams& p) {
  validate(p);
  const int n1 = f1.n();
  const int n2 = f2.n();
  if (k.rows() != n1 + n2 || k.cols() != n1 + n2)
    throw invalid_input("flg_from_gram: Gram matrix must be " + std::to_string(n1 + n2) + "x" +
                        std::to_string(n1 + n2) + ", got " + std::to_string(k.rows()) + "x" +
                        std::to_string(k.cols()));
  const JointBasis jb = joint_basis(k, p.tau);
  const Eigen::Index rank = jb.q.cols();
  if (rank == 0) return 1.0;  // zero base kernel: both Gaussians degenerate identically

  const auto s_of = [&](const GraphFactor& f, const Matrix& q) {
    Matrix s = q.transpose() * f.factor().solve(q);
    s = ((s + s.transpose()) / 2.0).eval();
    s.diagonal().array() += p.gamma;
    return s;
  };
  const Matrix s1 = s_of(f1, jb.q.topRows(n1));
  const Matrix s2 = s_of(f2, jb.q.bottomRows(n2));
  return bhattacharyya_ratio(s1, s2);
}

}  // namespace mlg
