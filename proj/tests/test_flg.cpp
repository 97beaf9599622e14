#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mlg/flg.hpp"
#include "testutil.hpp"

using mlg::FlgParams;
using mlg::Graph;
using mlg::Matrix;

namespace {

// base kernel = dot product of the two graphs' feature rows, on joint indices
auto feature_dot(const Graph& g1, const Graph& g2) {
  return [&g1, &g2](int i, int j) {
    const auto row = [&](int t) {
      return t < g1.n ? g1.features.row(t) : g2.features.row(t - g1.n);
    };
    return row(i).dot(row(j));
  };
}

}  // namespace

TEST_CASE("single-vertex graph: S = 1/eta + gamma") {
  const Graph g = mlg::make_graph(1, {}, Matrix::Ones(1, 1));
  const Matrix u = Matrix::Ones(1, 1);
  const Matrix s = mlg::s_matrix_explicit(u, mlg::laplacian(g, 0.5), 0.1);
  CHECK(s(0, 0) == doctest::Approx(1.0 / 0.5 + 0.1).epsilon(1e-15));
}

TEST_CASE("s_matrix_explicit matches a dense-inverse oracle") {
  auto rng = testutil::make_rng(43);
  for (int trial = 0; trial < 15; ++trial) {
    const Graph g = testutil::random_graph(rng, 7, 0.4, 3);
    const auto lap = mlg::laplacian(g, 0.2);
    const Matrix u = g.features.transpose();
    const Matrix s = mlg::s_matrix_explicit(u, lap, 0.05);
    const Matrix oracle =
        u * lap.matrix.inverse() * u.transpose() + 0.05 * Matrix::Identity(3, 3);
    CHECK((s - oracle).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  }
  const Graph tiny = mlg::make_graph(3, {{0, 1, 1.0}});
  CHECK_THROWS_AS(mlg::s_matrix_explicit(Matrix::Ones(2, 5), mlg::laplacian(tiny, 0.1), 0.1),
                  mlg::invalid_input);
}

TEST_CASE("explicit and kernelized paths agree") {
  auto rng = testutil::make_rng(47);
  for (int trial = 0; trial < 40; ++trial) {
    const int dim = 2 + static_cast<int>(rng() % 4);
    const Graph g1 = testutil::random_graph(rng, 3 + static_cast<int>(rng() % 7), 0.5, dim);
    const Graph g2 = testutil::random_graph(rng, 3 + static_cast<int>(rng() % 7), 0.5, dim);
    const FlgParams p{testutil::uniform(rng, 0.05, 1.0), testutil::uniform(rng, 0.01, 1.0), 1e-8};
    const double explicit_value =
        mlg::flg_explicit(g1, g1.features.transpose(), g2, g2.features.transpose(), p);
    const double kernelized_value = mlg::flg_kernelized(g1, g2, feature_dot(g1, g2), p);
    CHECK(kernelized_value == doctest::Approx(explicit_value).epsilon(5e-9));
  }
}

TEST_CASE("kernel of a graph with itself is 1") {
  auto rng = testutil::make_rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const Graph g = testutil::random_graph(rng, 6, 0.5, 3);
    const FlgParams p{0.1, 0.1, 1e-8};
    CHECK(mlg::flg_kernelized(g, g, feature_dot(g, g), p) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(mlg::flg_explicit(g, g.features.transpose(), g, g.features.transpose(), p) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("flg is symmetric and permutation invariant") {
  auto rng = testutil::make_rng(59);
  const Graph g1 = testutil::random_graph(rng, 7, 0.5, 3);
  const Graph g2 = testutil::random_graph(rng, 5, 0.5, 3);
  const FlgParams p{0.1, 0.1, 1e-8};
  const double k12 = mlg::flg_explicit(g1, g1.features.transpose(), g2, g2.features.transpose(), p);
  const double k21 = mlg::flg_explicit(g2, g2.features.transpose(), g1, g1.features.transpose(), p);
  CHECK(k12 == doctest::Approx(k21).epsilon(1e-12));

  const auto perm = testutil::random_permutation(rng, g1.n);
  const Graph h1 = testutil::permute_graph(g1, perm);
  const double kp = mlg::flg_explicit(h1, h1.features.transpose(), g2, g2.features.transpose(), p);
  CHECK(kp == doctest::Approx(k12).epsilon(1e-9));
}

TEST_CASE("flg is invariant to orthogonal rotations of the feature space") {
  auto rng = testutil::make_rng(61);
  const Graph g1 = testutil::random_graph(rng, 6, 0.5, 3);
  const Graph g2 = testutil::random_graph(rng, 5, 0.5, 3);
  const FlgParams p{0.1, 0.1, 1e-8};
  const double base = mlg::flg_explicit(g1, g1.features.transpose(), g2, g2.features.transpose(), p);
  // random rotation from QR
  Matrix a(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = testutil::uniform(rng, -1.0, 1.0);
  const Matrix r = Eigen::HouseholderQR<Matrix>(a).householderQ();
  const double rotated = mlg::flg_explicit(g1, r * g1.features.transpose(), g2,
                                           r * g2.features.transpose(), p);
  CHECK(rotated == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("increasing gamma drives the kernel toward 1") {
  auto rng = testutil::make_rng(67);
  const Graph g1 = testutil::random_graph(rng, 6, 0.5, 3);
  const Graph g2 = testutil::random_graph(rng, 6, 0.5, 3);
  double prev_gap = 2.0;
  for (double gamma : {0.01, 0.1, 1.0}) {
    const FlgParams p{0.1, gamma, 1e-8};
    const double k =
        mlg::flg_explicit(g1, g1.features.transpose(), g2, g2.features.transpose(), p);
    const double gap = std::abs(1.0 - k);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("disjoint feature supports score near zero, aligned supports higher") {
  // same topology, but one pair lives on orthogonal one-hot features
  const std::vector<mlg::Edge> edges{{0, 1, 1.0}, {1, 2, 1.0}};
  Matrix fa = Matrix::Zero(3, 2);
  fa.col(0).setOnes();  // all type-0
  Matrix fb = Matrix::Zero(3, 2);
  fb.col(1).setOnes();  // all type-1
  const Graph a = mlg::make_graph(3, edges, fa);
  const Graph b = mlg::make_graph(3, edges, fb);
  const FlgParams p{0.1, 1e-4, 1e-8};
  const double disjoint = mlg::flg_kernelized(a, b, feature_dot(a, b), p);
  const double aligned = mlg::flg_kernelized(a, a, feature_dot(a, a), p);
  CHECK(disjoint < 0.01);
  CHECK(aligned == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(disjoint < 0.01 * aligned);
}

TEST_CASE("joint_basis rejects an indefinite base kernel") {
  Matrix k(2, 2);
  k << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  CHECK_THROWS_AS(mlg::joint_basis(k, 1e-8), mlg::base_kernel_violation);
}

TEST_CASE("zero base kernel degenerates to kernel value 1") {
  const Graph g1 = mlg::make_graph(2, {{0, 1, 1.0}});
  const Graph g2 = mlg::make_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const FlgParams p{0.1, 0.1, 1e-8};
  CHECK(mlg::flg_kernelized(g1, g2, [](int, int) { return 0.0; }, p) == 1.0);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(mlg::validate(FlgParams{0.0, 0.1, 1e-8}), mlg::invalid_input);
  CHECK_THROWS_AS(mlg::validate(FlgParams{0.1, 0.0, 1e-8}), mlg::invalid_input);
  CHECK_THROWS_AS(mlg::validate(FlgParams{0.1, 0.1, -1.0}), mlg::invalid_input);
}
