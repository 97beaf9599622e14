#pragma once

// Undirected weighted graphs with optional vertex features, their regularized
// Laplacians, and the nested neighborhood structure used by the multiscale
// kernels: level-1 neighborhoods are hop-distance balls, level l is the union
// of the level-(l-1) neighborhoods of the level-(l-1) members.

#include <vector>

#include "mlg/spd.hpp"

namespace mlg {

struct Edge {
  int u = 0;
  int v = 0;
  double w = 1.0;
};

struct Graph {
  int n = 0;
  std::vector<Edge> edges;  // canonical: u < v, sorted, no duplicates
  Matrix features;          // n x d vertex features; 0 x 0 when absent
  int graph_id = -1;
  std::vector<std::vector<int>> neighbors;  // sorted adjacency lists

  int feature_dim() const { return features.size() == 0 ? 0 : static_cast<int>(features.cols()); }
};

// Validates and canonicalizes: endpoints in range, no self-loops, no
// duplicate edges, positive weights, feature row count matching n.
Graph make_graph(int n, std::vector<Edge> edges, Matrix features = Matrix(), int graph_id = -1);

struct RegularizedLaplacian {
  Matrix matrix;  // D - A + eta * I
  double eta = 0.0;
};

RegularizedLaplacian laplacian(const Graph& g, double eta);

// Vertices within hop distance <= radius of center (weights ignored),
// sorted ascending; always contains center.
std::vector<int> ball(const Graph& g, int center, int radius);

struct Subgraph {
  Graph graph;
  std::vector<int> parent;  // local vertex -> vertex id in the host graph
};

// Subgraph induced by a sorted, duplicate-free, nonempty vertex list.
// Inherits edge weights and feature rows.
Subgraph induced_subgraph(const Graph& g, const std::vector<int>& vertices);

struct NeighborhoodStack {
  int radius = 1;
  int levels = 1;
  // indexed [vertex][level-1]; members sorted ascending
  std::vector<std::vector<std::vector<int>>> members;
  std::vector<std::vector<Subgraph>> subgraphs;
};

NeighborhoodStack build_neighborhood_stack(const Graph& g, int radius, int levels);

}  // namespace mlg
