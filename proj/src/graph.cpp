#include "mlg/graph.hpp"

#include <algorithm>
#include <deque>
#include <string>

namespace mlg {

Graph make_graph(int n, std::vector<Edge> edges, Matrix features, int graph_id) {
  if (n < 0) throw invalid_input("make_graph: negative vertex count");
  for (auto& e : edges) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
      throw invalid_input("make_graph: edge endpoint out of range (" + std::to_string(e.u) + "," +
                          std::to_string(e.v) + ") with n=" + std::to_string(n));
    if (e.u == e.v)
      throw invalid_input("make_graph: self-loop at vertex " + std::to_string(e.u));
    if (!(e.w > 0.0))
      throw invalid_input("make_graph: nonpositive weight on edge (" + std::to_string(e.u) + "," +
                          std::to_string(e.v) + ")");
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (edges[i].u == edges[i - 1].u && edges[i].v == edges[i - 1].v)
      throw invalid_input("make_graph: duplicate edge (" + std::to_string(edges[i].u) + "," +
                          std::to_string(edges[i].v) + ")");
  if (features.size() != 0 && features.rows() != n)
    throw invalid_input("make_graph: feature matrix has " + std::to_string(features.rows()) +
                        " rows for " + std::to_string(n) + " vertices");

  Graph g;
  g.n = n;
  g.edges = std::move(edges);
  g.features = std::move(features);
  g.graph_id = graph_id;
  g.neighbors.assign(static_cast<std::size_t>(n), {});
  for (const auto& e : g.edges) {
    g.neighbors[static_cast<std::size_t>(e.u)].push_back(e.v);
    g.neighbors[static_cast<std::size_t>(e.v)].push_back(e.u);
  }
  for (auto& adj : g.neighbors) std::sort(adj.begin(), adj.end());
  return g;
}

RegularizedLaplacian laplacian(const Graph& g, double eta) {
  if (eta < 0.0) throw invalid_input("laplacian: eta must be >= 0");
  Matrix l = Matrix::Zero(g.n, g.n);
  for (const auto& e : g.edges) {
    l(e.u, e.u) += e.w;
    l(e.v, e.v) += e.w;
    l(e.u, e.v) -= e.w;
    l(e.v, e.u) -= e.w;
  }
  l.diagonal().array() += eta;
  return {std::move(l), eta};
}

std::vector<int> ball(const Graph& g, int center, int radius) {
  if (center < 0 || center >= g.n) throw invalid_input("ball: center out of range");
  if (radius < 0) throw invalid_input("ball: negative radius");
  std::vector<int> dist(static_cast<std::size_t>(g.n), -1);
  std::deque<int> queue;
  dist[static_cast<std::size_t>(center)] = 0;
  queue.push_back(center);
  std::vector<int> out;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    out.push_back(v);
    if (dist[static_cast<std::size_t>(v)] == radius) continue;
    for (int u : g.neighbors[static_cast<std::size_t>(v)]) {
      if (dist[static_cast<std::size_t>(u)] < 0) {
        dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
        queue.push_back(u);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Subgraph induced_subgraph(const Graph& g, const std::vector<int>& vertices) {
  if (vertices.empty()) throw invalid_input("induced_subgraph: empty vertex list");
  std::vector<int> local(static_cast<std::size_t>(g.n), -1);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const int v = vertices[i];
    if (v < 0 || v >= g.n) throw invalid_input("induced_subgraph: vertex out of range");
    if (i > 0 && vertices[i] <= vertices[i - 1])
      throw invalid_input("induced_subgraph: vertex list must be sorted and duplicate-free");
    local[static_cast<std::size_t>(v)] = static_cast<int>(i);
  }
  const int m = static_cast<int>(vertices.size());
  std::vector<Edge> edges;
  for (const auto& e : g.edges) {
    const int lu = local[static_cast<std::size_t>(e.u)];
    const int lv = local[static_cast<std::size_t>(e.v)];
    if (lu >= 0 && lv >= 0) edges.push_back({lu, lv, e.w});
  }
  Matrix features;
  if (g.features.size() != 0) {
    features.resize(m, g.features.cols());
    for (int i = 0; i < m; ++i)
      features.row(i) = g.features.row(vertices[static_cast<std::size_t>(i)]);
  }
  Subgraph sub;
  sub.graph = make_graph(m, std::move(edges), std::move(features), g.graph_id);
  sub.parent = vertices;
  return sub;
}

NeighborhoodStack build_neighborhood_stack(const Graph& g, int radius, int levels) {
  if (radius < 1) throw invalid_input("build_neighborhood_stack: radius must be >= 1");
  if (levels < 1) throw invalid_input("build_neighborhood_stack: levels must be >= 1");
  NeighborhoodStack stack;
  stack.radius = radius;
  stack.levels = levels;
  stack.members.assign(static_cast<std::size_t>(g.n), {});
  stack.subgraphs.assign(static_cast<std::size_t>(g.n), {});
  for (int v = 0; v < g.n; ++v) {
    stack.members[static_cast<std::size_t>(v)].reserve(static_cast<std::size_t>(levels));
    stack.members[static_cast<std::size_t>(v)].push_back(ball(g, v, radius));
  }
  // level l (>= 2): union of the level-(l-1) neighborhoods of all members
  std::vector<char> mark(static_cast<std::size_t>(g.n), 0);
  for (int l = 1; l < levels; ++l) {
    for (int v = 0; v < g.n; ++v) {
      std::vector<int> merged;
      for (int w : stack.members[static_cast<std::size_t>(v)][static_cast<std::size_t>(l - 1)]) {
        for (int u : stack.members[static_cast<std::size_t>(w)][static_cast<std::size_t>(l - 1)]) {
          if (!mark[static_cast<std::size_t>(u)]) {
            mark[static_cast<std::size_t>(u)] = 1;
            merged.push_back(u);
          }
        }
      }
      for (int u : merged) mark[static_cast<std::size_t>(u)] = 0;
      std::sort(merged.begin(), merged.end());
      stack.members[static_cast<std::size_t>(v)].push_back(std::move(merged));
    }
  }
  for (int v = 0; v < g.n; ++v) {
    auto& subs = stack.subgraphs[static_cast<std::size_t>(v)];
    subs.reserve(static_cast<std::size_t>(levels));
    for (int l = 0; l < levels; ++l)
      subs.push_back(induced_subgraph(g, stack.members[static_cast<std::size_t>(v)][static_cast<std::size_t>(l)]));
  }
  return stack;
}

}  // namespace mlg
