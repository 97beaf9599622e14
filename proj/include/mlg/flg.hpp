#pragma once

// Feature-space Laplacian graph kernel between two graphs.
//
// Explicit path: with feature map U (m x n, one column per vertex) and
// regularized Laplacian L, each graph contributes S = U L^{-1} U^T + gamma I
// and the kernel is the Bhattacharyya ratio of the two S matrices.
//
// Kernelized path: the feature map is known only through a base kernel kappa
// on vertices. The joint Gram matrix over both vertex sets is
// eigendecomposed; its thresholded basis Q (rows scaled by sqrt(eigenvalue))
// plays the role of U restricted to the span of the data, which leaves the
// ratio unchanged. The two paths agree to within eigensolver accuracy.

#include <functional>

#include "mlg/graph.hpp"
#include "mlg/spd.hpp"

namespace mlg {

struct FlgParams {
  double eta = 0.1;     // Laplacian regularizer, > 0
  double gamma = 0.1;   // S-matrix regularizer, > 0
  double tau = 1e-8;    // relative eigenvalue threshold for the joint basis
};

void validate(const FlgParams& p);

// S = U L^{-1} U^T + gamma I for U of shape m x n (features by vertices).
Matrix s_matrix_explicit(const Matrix& u, const RegularizedLaplacian& lap, double gamma);

double flg_explicit(const Graph& g1, const Matrix& u1, const Graph& g2, const Matrix& u2,
                    const FlgParams& p);

// Thresholded basis of a joint base-kernel Gram matrix. q has one row per
// vertex and one column per retained eigenvalue, scaled by sqrt(lambda).
// Throws base_kernel_violation if k is not PSD within 1e-8 * lambda_max.
struct JointBasis {
  SymEig eig;
  Matrix q;
};

JointBasis joint_basis(const Matrix& k, double tau);

// Cholesky factor of a graph's regularized Laplacian, reusable across many
// kernel evaluations against the same graph.
class GraphFactor {
 public:
  GraphFactor() = default;
  GraphFactor(const Graph& g, double eta)
      : n_(g.n), factor_(SpdFactor::compute(laplacian(g, eta).matrix, "regularized Laplacian")) {}

  int n() const { return n_; }
  const SpdFactor& factor() const { return factor_; }

 private:
  int n_ = 0;
  SpdFactor factor_;
};

// Kernelized FLG given the precomputed joint Gram matrix k over the
// concatenated vertex sets (first f1.n() rows/cols belong to graph 1).
double flg_from_gram(const GraphFactor& f1, const GraphFactor& f2, const Matrix& k,
                     const FlgParams& p);

// Kernelized FLG from a base kernel callable on joint vertex indices
// in [0, g1.n + g2.n); indices < g1.n refer to graph 1.
template <typename Kernel>
double flg_kernelized(const Graph& g1, const Graph& g2, Kernel&& kappa, const FlgParams& p) {
  validate(p);
  const int n = g1.n + g2.n;
  Matrix k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = kappa(i, j);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  const GraphFactor f1(g1, p.eta);
  const GraphFactor f2(g2, p.eta);
  return flg_from_gram(f1, f2, k, p);
}

}  // namespace mlg
