#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "mlg/graph.hpp"
#include "testutil.hpp"

using mlg::Edge;
using mlg::Graph;
using mlg::Matrix;

namespace {

Graph path3() { return mlg::make_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}}); }

}  // namespace

TEST_CASE("laplacian of the 3-path") {
  const auto lap = mlg::laplacian(path3(), 0.1);
  Matrix expected(3, 3);
  expected << 1.1, -1.0, 0.0, -1.0, 2.1, -1.0, 0.0, -1.0, 1.1;
  CHECK((lap.matrix - expected).cwiseAbs().maxCoeff() == 0.0);
  // row sums collapse to eta exactly
  for (int i = 0; i < 3; ++i) CHECK(lap.matrix.row(i).sum() == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("laplacian quadratic form equals the weighted edge-difference sum") {
  auto rng = testutil::make_rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = testutil::random_graph(rng, 8, 0.4, 2);
    const double eta = testutil::uniform(rng, 0.01, 1.0);
    const auto lap = mlg::laplacian(g, eta);
    mlg::Vector z(g.n);
    for (int i = 0; i < g.n; ++i) z(i) = testutil::uniform(rng, -1.0, 1.0);
    double expected = eta * z.squaredNorm();
    for (const auto& e : g.edges) {
      const double d = z(e.u) - z(e.v);
      expected += e.w * d * d;
    }
    CHECK(z.dot(lap.matrix * z) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(z.dot(lap.matrix * z) >= 0.0);
  }
}

TEST_CASE("make_graph validates its input") {
  CHECK_THROWS_AS(mlg::make_graph(2, {{0, 2, 1.0}}), mlg::invalid_input);   // out of range
  CHECK_THROWS_AS(mlg::make_graph(2, {{1, 1, 1.0}}), mlg::invalid_input);   // self-loop
  CHECK_THROWS_AS(mlg::make_graph(2, {{0, 1, 0.0}}), mlg::invalid_input);   // zero weight
  CHECK_THROWS_AS(mlg::make_graph(3, {{0, 1, 1.0}, {1, 0, 2.0}}), mlg::invalid_input);  // dup
  CHECK_THROWS_AS(mlg::make_graph(3, {}, Matrix::Zero(2, 2)), mlg::invalid_input);  // bad rows
  // canonicalization flips reversed endpoints
  const Graph g = mlg::make_graph(3, {{2, 0, 1.5}});
  CHECK(g.edges[0].u == 0);
  CHECK(g.edges[0].v == 2);
  CHECK(g.edges[0].w == 1.5);
  CHECK(g.neighbors[0] == std::vector<int>{2});
}

TEST_CASE("ball follows hop distance and ignores weights") {
  const Graph g = mlg::make_graph(5, {{0, 1, 100.0}, {1, 2, 0.01}, {2, 3, 1.0}});
  CHECK(mlg::ball(g, 0, 1) == std::vector<int>{0, 1});
  CHECK(mlg::ball(g, 0, 2) == std::vector<int>{0, 1, 2});
  CHECK(mlg::ball(g, 1, 1) == std::vector<int>{0, 1, 2});
  CHECK(mlg::ball(g, 4, 3) == std::vector<int>{4});  // isolated vertex
  CHECK(mlg::ball(g, 0, 0) == std::vector<int>{0});
  CHECK_THROWS_AS(mlg::ball(g, 9, 1), mlg::invalid_input);
}

TEST_CASE("induced subgraph inherits weights and features") {
  Matrix features(4, 2);
  features << 1, 2, 3, 4, 5, 6, 7, 8;
  const Graph g = mlg::make_graph(4, {{0, 1, 2.5}, {1, 2, 1.0}, {2, 3, 4.0}}, features, 9);
  const auto sub = mlg::induced_subgraph(g, {1, 2, 3});
  CHECK(sub.graph.n == 3);
  REQUIRE(sub.graph.edges.size() == 2);
  CHECK(sub.graph.edges[0].w == 1.0);
  CHECK(sub.graph.edges[1].w == 4.0);
  CHECK(sub.parent == std::vector<int>{1, 2, 3});
  CHECK(sub.graph.features(0, 0) == 3.0);
  CHECK(sub.graph.features(2, 1) == 8.0);
  CHECK(sub.graph.graph_id == 9);
  CHECK_THROWS_AS(mlg::induced_subgraph(g, {}), mlg::invalid_input);
  CHECK_THROWS_AS(mlg::induced_subgraph(g, {2, 1}), mlg::invalid_input);
}

TEST_CASE("neighborhood stack: balls at level 1, unions above, nested throughout") {
  auto rng = testutil::make_rng(37);
  for (int trial = 0; trial < 15; ++trial) {
    const Graph g = testutil::random_graph(rng, 10, 0.25, 2);
    const int levels = 3;
    const auto stack = mlg::build_neighborhood_stack(g, 1, levels);
    for (int v = 0; v < g.n; ++v) {
      CHECK(stack.members[v][0] == mlg::ball(g, v, 1));
      for (int l = 1; l < levels; ++l) {
        // independent recomputation of the union recursion
        std::set<int> expected;
        for (int w : stack.members[v][l - 1])
          expected.insert(stack.members[w][l - 1].begin(), stack.members[w][l - 1].end());
        CHECK(stack.members[v][l] == std::vector<int>(expected.begin(), expected.end()));
        // nestedness
        CHECK(std::includes(stack.members[v][l].begin(), stack.members[v][l].end(),
                            stack.members[v][l - 1].begin(), stack.members[v][l - 1].end()));
      }
      // the center is always a member
      for (int l = 0; l < levels; ++l)
        CHECK(std::binary_search(stack.members[v][l].begin(), stack.members[v][l].end(), v));
    }
  }
}

TEST_CASE("neighborhood stack is permutation equivariant") {
  auto rng = testutil::make_rng(41);
  const Graph g = testutil::random_graph(rng, 9, 0.3, 2);
  const auto perm = testutil::random_permutation(rng, g.n);
  const Graph h = testutil::permute_graph(g, perm);
  const auto sg = mlg::build_neighborhood_stack(g, 1, 2);
  const auto sh = mlg::build_neighborhood_stack(h, 1, 2);
  for (int v = 0; v < g.n; ++v) {
    for (int l = 0; l < 2; ++l) {
      std::vector<int> mapped;
      for (int u : sg.members[v][l]) mapped.push_back(perm[static_cast<std::size_t>(u)]);
      std::sort(mapped.begin(), mapped.end());
      CHECK(mapped == sh.members[perm[static_cast<std::size_t>(v)]][l]);
    }
  }
}

TEST_CASE("neighborhoods saturate to components, never cross them") {
  const Graph g = mlg::make_graph(6, {{0, 1, 1.0}, {1, 2, 1.0}, {3, 4, 1.0}});
  const auto stack = mlg::build_neighborhood_stack(g, 1, 4);
  CHECK(stack.members[0][3] == std::vector<int>{0, 1, 2});  // saturated component
  CHECK(stack.members[3][3] == std::vector<int>{3, 4});
  CHECK(stack.members[5][3] == std::vector<int>{5});
  CHECK_THROWS_AS(mlg::build_neighborhood_stack(g, 0, 2), mlg::invalid_input);
  CHECK_THROWS_AS(mlg::build_neighborhood_stack(g, 1, 0), mlg::invalid_input);
}
