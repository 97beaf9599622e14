#pragma once

// Exact multiscale Laplacian graph kernel.
//
// Level 1 compares the radius-r balls around two vertices with the FLG
// kernel under the vertex-feature dot product; level l compares the level-l
// neighborhoods under the level-(l-1) kernel; the graph kernel is the FLG
// kernel of the whole graphs under the top-level vertex kernel.
//
// The recursion is evaluated iteratively: the engine first plans which
// (level, vertex-pair) values a request needs, then fills them bottom-up
// through an insert-once cache. Vertices whose level-l subgraphs carry the
// same fingerprint share one canonical representative, so repeated
// neighborhoods are evaluated once.

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "mlg/flg.hpp"
#include "mlg/gram.hpp"
#include "mlg/graph.hpp"

namespace mlg {

struct VertexId {
  int graph = 0;
  int vertex = 0;
  friend bool operator==(const VertexId&, const VertexId&) = default;
};

struct MlsParams {
  int levels = 2;
  int radius = 1;
  double eta = 0.1;
  double gamma = 0.1;
  double tau = 1e-8;
  std::uint64_t budget = 10'000'000;  // cap on FLG evaluations
  bool share_cache = true;            // reuse values across graph pairs
  bool dedup = true;                  // canonicalize vertices by fingerprint
};

void validate(const MlsParams& p);

// Isomorphism-invariant summary of a subgraph together with per-vertex label
// keys (quantized feature rows at level 1, lower-level fingerprint class ids
// above). Compared as a full tuple, never by hash.
struct SubgraphFingerprint {
  int n_vertices = 0;
  int n_edges = 0;
  std::vector<long long> degrees;               // quantized weighted degrees, sorted
  std::vector<std::vector<long long>> labels;   // per-vertex keys, sorted
  std::vector<long long> spectrum;              // quantized Laplacian eigenvalues, sorted
  friend auto operator<=>(const SubgraphFingerprint&, const SubgraphFingerprint&) = default;
};

SubgraphFingerprint fingerprint(const Subgraph& sub,
                                const std::vector<std::vector<long long>>& labels);

// Insert-once store for (level, canonical vertex pair) -> kernel value.
// Thread safe; a value, once written, is never replaced.
class KernelCache {
 public:
  bool lookup(std::uint64_t key, double* out) const;
  // Returns true if this call stored the value (false: key already present).
  bool insert(std::uint64_t key, double value);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, double> values_;
};

class ExactMlgEngine {
 public:
  // graphs must outlive the engine and all share one feature dimension.
  ExactMlgEngine(const std::vector<Graph>& graphs, const MlsParams& params);

  // Level-l vertex kernel between neighborhoods of a and b (1-based level).
  double mls(int level, VertexId a, VertexId b);

  // Multiscale kernel between two graphs of the collection.
  double mlg(int gi, int gj);

  // Full Gram matrix over the collection; identical for every thread count.
  GramMatrix gram(int threads = 1);

  std::uint64_t evaluations() const { return evals_.load(); }
  std::size_t cache_size() const { return cache_.size(); }
  int fingerprint_classes(int level) const;
  const MlsParams& params() const { return params_; }

 private:
  std::int64_t global_id(int graph, int vertex) const { return offset_[static_cast<std::size_t>(graph)] + vertex; }
  int graph_of(std::int64_t g) const;
  const Subgraph& subgraph_at(std::int64_t g, int level) const;
  std::int64_t canonical(int level, std::int64_t g) const;
  std::uint64_t pair_key(int level, std::int64_t a, std::int64_t b) const;
  void append_joint(int level, std::int64_t g, std::vector<std::int64_t>* out) const;
  double base_kernel(std::int64_t a, std::int64_t b) const;
  void count_evaluation(int level);
  double eval_pair(int level, std::int64_t a, std::int64_t b, KernelCache& store) const;
  void ensure(int level, std::vector<std::pair<std::int64_t, std::int64_t>> tasks,
              KernelCache& store);
  double top_kernel(int gi, int gj, KernelCache& store);

  const std::vector<Graph>* graphs_;
  MlsParams params_;
  FlgParams flg_;
  std::vector<NeighborhoodStack> stacks_;
  std::vector<std::int64_t> offset_;
  std::int64_t total_ = 0;

  // [level-1][global vertex] -> fingerprint class / canonical representative
  std::vector<std::vector<int>> class_id_;
  std::vector<std::vector<std::int64_t>> rep_;
  std::vector<int> class_count_;

  // Cholesky factors of representative subgraph Laplacians, [level-1]
  std::vector<std::unordered_map<std::int64_t, GraphFactor>> factors_;
  std::vector<GraphFactor> whole_factors_;

  KernelCache cache_;
  std::atomic<std::uint64_t> evals_{0};
};

GramMatrix gram_exact(const std::vector<Graph>& graphs, const MlsParams& params, int threads = 1);

}  // namespace mlg
