#pragma once

// Randomized low-rank multiscale kernel. Each level evaluates the FLG kernel
// only between the neighborhoods of a uniform vertex sample, eigendecomposes
// that sample Gram matrix, and Nystrom-projects every vertex of every graph
// onto its leading eigenvectors. The projected rows become the explicit
// features of the next level; the final level's rows feed one S matrix per
// whole graph, and the Gram matrix is filled with pairwise Bhattacharyya
// ratios. At full sampling and full rank this reproduces the exact kernel.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mlg/flg.hpp"
#include "mlg/gram.hpp"
#include "mlg/graph.hpp"

namespace mlg {

struct PipelineParams {
  int levels = 2;
  int radius = 1;
  double eta = 0.1;
  double gamma = 0.01;
  double tau = 1e-8;
  int n_samples = 100;  // vertices sampled per level
  int rank = 10;        // eigenvectors kept per level
  std::uint64_t seed = 0;
  int threads = 1;
  std::function<void(const std::string&)> warn;  // optional diagnostics sink
};

void validate(const PipelineParams& p);

struct LinearizedLevel {
  int level = 1;
  std::vector<std::int64_t> sample;  // sampled global vertex ids, draw order
  Vector eigenvalues;                // retained eigenvalues of the sample Gram
  Matrix sample_vectors;             // matching eigenvectors (n_samples x rank)
  int rank = 0;                      // columns actually kept
  std::vector<Matrix> features;      // per graph: n_g x rank projected rows
};

// n_samples distinct vertices drawn uniformly from the concatenated vertex
// sets of all graphs (global ids; graph boundaries are ignored).
std::vector<std::int64_t> sample_vertices(const std::vector<Graph>& graphs, int n_samples,
                                          std::mt19937_64& rng);

// One pass of the per-level linearization. prev_features holds one matrix
// per graph (level l-1 features; the raw vertex features for l = 1).
LinearizedLevel linearize_level(int level, const std::vector<Graph>& graphs,
                                const std::vector<NeighborhoodStack>& stacks,
                                const std::vector<Matrix>& prev_features,
                                const PipelineParams& params, std::mt19937_64& rng);

// Whole-graph S matrices built from the top level's projected features.
std::vector<Matrix> s_matrices_per_graph(const std::vector<Graph>& graphs,
                                         const LinearizedLevel& top, double eta, double gamma);

GramMatrix gram_linearized(const std::vector<Graph>& graphs, const PipelineParams& params);

}  // namespace mlg
