#include "mlg/mlg_exact.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "mlg/parallel.hpp"

namespace mlg {

namespace {

constexpr std::int64_t kMaxVertices = std::int64_t(1) << 22;

long long quantize6(double x) { return std::llround(x * 1e6); }

std::vector<long long> quantize_row(const Matrix& features, int row) {
  std::vector<long long> out(static_cast<std::size_t>(features.cols()));
  for (Eigen::Index c = 0; c < features.cols(); ++c)
    out[static_cast<std::size_t>(c)] = quantize6(features(row, c));
  return out;
}

}  // namespace

void validate(const MlsParams& p) {
  if (p.levels < 1) throw invalid_input("MlsParams: levels must be >= 1");
  if (p.radius < 1) throw invalid_input("MlsParams: radius must be >= 1");
  if (p.budget == 0) throw invalid_input("MlsParams: budget must be positive");
  validate(FlgParams{p.eta, p.gamma, p.tau});
}

SubgraphFingerprint fingerprint(const Subgraph& sub,
                                const std::vector<std::vector<long long>>& labels) {
  if (labels.size() != static_cast<std::size_t>(sub.graph.n))
    throw invalid_input("fingerprint: need one label key per subgraph vertex");
  SubgraphFingerprint fp;
  fp.n_vertices = sub.graph.n;
  fp.n_edges = static_cast<int>(sub.graph.edges.size());

  std::vector<double> degree(static_cast<std::size_t>(sub.graph.n), 0.0);
  for (const auto& e : sub.graph.edges) {
    degree[static_cast<std::size_t>(e.u)] += e.w;
    degree[static_cast<std::size_t>(e.v)] += e.w;
  }
  fp.degrees.reserve(degree.size());
  for (double d : degree) fp.degrees.push_back(quantize6(d));
  std::sort(fp.degrees.begin(), fp.degrees.end());

  fp.labels = labels;
  std::sort(fp.labels.begin(), fp.labels.end());

  Eigen::SelfAdjointEigenSolver<Matrix> es(laplacian(sub.graph, 0.0).matrix,
                                           Eigen::EigenvaluesOnly);
  fp.spectrum.reserve(static_cast<std::size_t>(sub.graph.n));
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    fp.spectrum.push_back(quantize6(es.eigenvalues()(i)));
  std::sort(fp.spectrum.begin(), fp.spectrum.end());
  return fp;
}

bool KernelCache::lookup(std::uint64_t key, double* out) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = values_.find(key);
  if (it == values_.end()) return false;
  if (out) *out = it->second;
  return true;
}

bool KernelCache::insert(std::uint64_t key, double value) {
  std::lock_guard<std::mutex> lock(mutex_);
  return values_.emplace(key, value).second;
}

std::size_t KernelCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return values_.size();
}

ExactMlgEngine::ExactMlgEngine(const std::vector<Graph>& graphs, const MlsParams& params)
    : graphs_(&graphs), params_(params), flg_{params.eta, params.gamma, params.tau} {
  validate(params_);
  if (graphs.empty()) throw invalid_input("ExactMlgEngine: empty graph collection");
  const int dim = graphs.front().feature_dim();
  offset_.reserve(graphs.size() + 1);
  offset_.push_back(0);
  for (const auto& g : graphs) {
    if (g.feature_dim() != dim)
      throw invalid_input("ExactMlgEngine: graphs disagree on feature dimension");
    offset_.push_back(offset_.back() + g.n);
  }
  total_ = offset_.back();
  if (total_ >= kMaxVertices)
    throw invalid_input("ExactMlgEngine: vertex count exceeds the supported maximum");

  stacks_.reserve(graphs.size());
  for (const auto& g : graphs)
    stacks_.push_back(build_neighborhood_stack(g, params_.radius, params_.levels));

  // Fingerprint pass, bottom-up; one serial scan fixes classes and
  // representatives so later evaluation order cannot change them.
  class_id_.assign(static_cast<std::size_t>(params_.levels), {});
  rep_.assign(static_cast<std::size_t>(params_.levels), {});
  class_count_.assign(static_cast<std::size_t>(params_.levels), 0);
  for (int l = 1; l <= params_.levels; ++l) {
    auto& classes = class_id_[static_cast<std::size_t>(l - 1)];
    auto& reps = rep_[static_cast<std::size_t>(l - 1)];
    classes.assign(static_cast<std::size_t>(total_), 0);
    reps.assign(static_cast<std::size_t>(total_), 0);
    if (!params_.dedup) {
      for (std::int64_t g = 0; g < total_; ++g) {
        classes[static_cast<std::size_t>(g)] = static_cast<int>(g);
        reps[static_cast<std::size_t>(g)] = g;
      }
      class_count_[static_cast<std::size_t>(l - 1)] = static_cast<int>(total_);
      continue;
    }
    std::map<SubgraphFingerprint, int> table;
    std::vector<std::int64_t> first_seen;
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
      const auto& stack = stacks_[gi];
      for (int v = 0; v < graphs[gi].n; ++v) {
        const Subgraph& sub = stack.subgraphs[static_cast<std::size_t>(v)][static_cast<std::size_t>(l - 1)];
        std::vector<std::vector<long long>> labels;
        labels.reserve(static_cast<std::size_t>(sub.graph.n));
        for (int u = 0; u < sub.graph.n; ++u) {
          if (l == 1) {
            labels.push_back(dim == 0 ? std::vector<long long>{}
                                      : quantize_row(sub.graph.features, u));
          } else {
            const std::int64_t pg = global_id(static_cast<int>(gi),
                                              sub.parent[static_cast<std::size_t>(u)]);
            labels.push_back({class_id_[static_cast<std::size_t>(l - 2)][static_cast<std::size_t>(pg)]});
          }
        }
        const SubgraphFingerprint fp = fingerprint(sub, labels);
        const std::int64_t g = global_id(static_cast<int>(gi), v);
        const auto [it, fresh] = table.emplace(fp, static_cast<int>(first_seen.size()));
        if (fresh) first_seen.push_back(g);
        classes[static_cast<std::size_t>(g)] = it->second;
        reps[static_cast<std::size_t>(g)] = first_seen[static_cast<std::size_t>(it->second)];
      }
    }
    class_count_[static_cast<std::size_t>(l - 1)] = static_cast<int>(first_seen.size());
  }

  // Laplacian factors for every representative subgraph and every graph.
  factors_.assign(static_cast<std::size_t>(params_.levels), {});
  for (int l = 1; l <= params_.levels; ++l) {
    auto& per_level = factors_[static_cast<std::size_t>(l - 1)];
    for (std::int64_t g = 0; g < total_; ++g) {
      if (rep_[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(g)] != g) continue;
      per_level.emplace(g, GraphFactor(subgraph_at(g, l).graph, params_.eta));
    }
  }
  whole_factors_.reserve(graphs.size());
  for (const auto& g : graphs) whole_factors_.emplace_back(g, params_.eta);
}

int ExactMlgEngine::graph_of(std::int64_t g) const {
  const auto it = std::upper_bound(offset_.begin(), offset_.end(), g);
  return static_cast<int>(it - offset_.begin()) - 1;
}

const Subgraph& ExactMlgEngine::subgraph_at(std::int64_t g, int level) const {
  const int gi = graph_of(g);
  const int v = static_cast<int>(g - offset_[static_cast<std::size_t>(gi)]);
  return stacks_[static_cast<std::size_t>(gi)]
      .subgraphs[static_cast<std::size_t>(v)][static_cast<std::size_t>(level - 1)];
}

std::int64_t ExactMlgEngine::canonical(int level, std::int64_t g) const {
  return rep_[static_cast<std::size_t>(level - 1)][static_cast<std::size_t>(g)];
}

std::uint64_t ExactMlgEngine::pair_key(int level, std::int64_t a, std::int64_t b) const {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(level) << 44) | (static_cast<std::uint64_t>(a) << 22) |
         static_cast<std::uint64_t>(b);
}

void ExactMlgEngine::append_joint(int level, std::int64_t g, std::vector<std::int64_t>* out) const {
  const int gi = graph_of(g);
  const int v = static_cast<int>(g - offset_[static_cast<std::size_t>(gi)]);
  const auto& members = stacks_[static_cast<std::size_t>(gi)]
                            .members[static_cast<std::size_t>(v)][static_cast<std::size_t>(level - 1)];
  for (int u : members) out->push_back(global_id(gi, u));
}

double ExactMlgEngine::base_kernel(std::int64_t a, std::int64_t b) const {
  const int ga = graph_of(a);
  const int gb = graph_of(b);
  const auto& fa = (*graphs_)[static_cast<std::size_t>(ga)].features;
  const auto& fb = (*graphs_)[static_cast<std::size_t>(gb)].features;
  if (fa.size() == 0) return 0.0;
  return fa.row(a - offset_[static_cast<std::size_t>(ga)])
      .dot(fb.row(b - offset_[static_cast<std::size_t>(gb)]));
}

void ExactMlgEngine::count_evaluation(int level) {
  const std::uint64_t n = evals_.fetch_add(1) + 1;
  if (n > params_.budget)
    throw budget_exceeded("kernel evaluation budget of " + std::to_string(params_.budget) +
                              " exhausted at level " + std::to_string(level),
                          level);
}

double ExactMlgEngine::eval_pair(int level, std::int64_t a, std::int64_t b,
                                 KernelCache& store) const {
  const Subgraph& sa = subgraph_at(a, level);
  const Subgraph& sb = subgraph_at(b, level);
  std::vector<std::int64_t> joint;
  joint.reserve(static_cast<std::size_t>(sa.graph.n + sb.graph.n));
  append_joint(level, a, &joint);
  append_joint(level, b, &joint);
  const int n = static_cast<int>(joint.size());

  Matrix k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double v;
      if (level == 1) {
        v = base_kernel(joint[static_cast<std::size_t>(i)], joint[static_cast<std::size_t>(j)]);
      } else {
        const std::uint64_t key =
            pair_key(level - 1, canonical(level - 1, joint[static_cast<std::size_t>(i)]),
                     canonical(level - 1, joint[static_cast<std::size_t>(j)]));
        if (!store.lookup(key, &v))
          throw std::logic_error("ExactMlgEngine: planned kernel value missing from cache");
      }
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  const auto& fa = factors_[static_cast<std::size_t>(level - 1)].at(a);
  const auto& fb = factors_[static_cast<std::size_t>(level - 1)].at(b);
  return flg_from_gram(fa, fb, k, flg_);
}

void ExactMlgEngine::ensure(int level, std::vector<std::pair<std::int64_t, std::int64_t>> tasks,
                            KernelCache& store) {
  std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> needed(
      static_cast<std::size_t>(level + 1));
  std::vector<std::unordered_set<std::uint64_t>> seen(static_cast<std::size_t>(level + 1));
  for (auto [a, b] : tasks) {
    if (a > b) std::swap(a, b);
    const std::uint64_t key = pair_key(level, a, b);
    if (!store.lookup(key, nullptr) && seen[static_cast<std::size_t>(level)].insert(key).second)
      needed[static_cast<std::size_t>(level)].push_back({a, b});
  }
  // Plan top-down: each level-l pair needs level-(l-1) values on the joint
  // vertex set of its two subgraphs.
  for (int l = level; l >= 2; --l) {
    for (const auto& [a, b] : needed[static_cast<std::size_t>(l)]) {
      std::vector<std::int64_t> verts;
      append_joint(l, a, &verts);
      append_joint(l, b, &verts);
      for (auto& g : verts) g = canonical(l - 1, g);
      std::sort(verts.begin(), verts.end());
      verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
      for (std::size_t i = 0; i < verts.size(); ++i) {
        for (std::size_t j = i; j < verts.size(); ++j) {
          const std::uint64_t key = pair_key(l - 1, verts[i], verts[j]);
          if (!store.lookup(key, nullptr) && seen[static_cast<std::size_t>(l - 1)].insert(key).second)
            needed[static_cast<std::size_t>(l - 1)].push_back({verts[i], verts[j]});
        }
      }
    }
  }
  // Evaluate bottom-up in sorted order so budget aborts are reproducible.
  for (int l = 1; l <= level; ++l) {
    auto& batch = needed[static_cast<std::size_t>(l)];
    std::sort(batch.begin(), batch.end());
    for (const auto& [a, b] : batch) {
      const std::uint64_t key = pair_key(l, a, b);
      if (store.lookup(key, nullptr)) continue;
      const double v = eval_pair(l, a, b, store);
      if (store.insert(key, v)) count_evaluation(l);
    }
  }
}

double ExactMlgEngine::mls(int level, VertexId a, VertexId b) {
  if (level < 1 || level > params_.levels)
    throw invalid_input("mls: level must be in [1, levels]");
  const auto check = [&](VertexId v) {
    if (v.graph < 0 || static_cast<std::size_t>(v.graph) >= graphs_->size() || v.vertex < 0 ||
        v.vertex >= (*graphs_)[static_cast<std::size_t>(v.graph)].n)
      throw invalid_input("mls: vertex id out of range");
  };
  check(a);
  check(b);
  std::int64_t ga = canonical(level, global_id(a.graph, a.vertex));
  std::int64_t gb = canonical(level, global_id(b.graph, b.vertex));
  if (ga > gb) std::swap(ga, gb);
  KernelCache local;
  KernelCache& store = params_.share_cache ? cache_ : local;
  const std::uint64_t key = pair_key(level, ga, gb);
  double out;
  if (store.lookup(key, &out)) return out;
  ensure(level, {{ga, gb}}, store);
  if (!store.lookup(key, &out))
    throw std::logic_error("ExactMlgEngine: value missing after evaluation");
  return out;
}

double ExactMlgEngine::top_kernel(int gi, int gj, KernelCache& store) {
  const int levels = params_.levels;
  std::vector<std::int64_t> joint;
  joint.reserve(static_cast<std::size_t>((*graphs_)[static_cast<std::size_t>(gi)].n +
                                         (*graphs_)[static_cast<std::size_t>(gj)].n));
  for (int v = 0; v < (*graphs_)[static_cast<std::size_t>(gi)].n; ++v)
    joint.push_back(global_id(gi, v));
  for (int v = 0; v < (*graphs_)[static_cast<std::size_t>(gj)].n; ++v)
    joint.push_back(global_id(gj, v));

  std::vector<std::pair<std::int64_t, std::int64_t>> tasks;
  {
    std::vector<std::int64_t> reps = joint;
    for (auto& g : reps) g = canonical(levels, g);
    std::sort(reps.begin(), reps.end());
    reps.erase(std::unique(reps.begin(), reps.end()), reps.end());
    tasks.reserve(reps.size() * (reps.size() + 1) / 2);
    for (std::size_t i = 0; i < reps.size(); ++i)
      for (std::size_t j = i; j < reps.size(); ++j) tasks.push_back({reps[i], reps[j]});
  }
  ensure(levels, std::move(tasks), store);

  const int n = static_cast<int>(joint.size());
  Matrix k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const std::uint64_t key =
          pair_key(levels, canonical(levels, joint[static_cast<std::size_t>(i)]),
                   canonical(levels, joint[static_cast<std::size_t>(j)]));
      double v;
      if (!store.lookup(key, &v))
        throw std::logic_error("ExactMlgEngine: planned kernel value missing from cache");
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  count_evaluation(levels);
  return flg_from_gram(whole_factors_[static_cast<std::size_t>(gi)],
                       whole_factors_[static_cast<std::size_t>(gj)], k, flg_);
}

double ExactMlgEngine::mlg(int gi, int gj) {
  if (gi < 0 || static_cast<std::size_t>(gi) >= graphs_->size() || gj < 0 ||
      static_cast<std::size_t>(gj) >= graphs_->size())
    throw invalid_input("mlg: graph index out of range");
  if (params_.share_cache) return top_kernel(gi, gj, cache_);
  KernelCache local;
  return top_kernel(gi, gj, local);
}

GramMatrix ExactMlgEngine::gram(int threads) {
  const std::int64_t m = static_cast<std::int64_t>(graphs_->size());
  GramMatrix out;
  out.values.resize(m, m);
  parallel_for(triangular_count(m), threads, [&](std::int64_t t) {
    const auto [i, j] = triangular_index(t, m);
    const double v = mlg(static_cast<int>(i), static_cast<int>(j));
    out.values(i, j) = v;
    out.values(j, i) = v;
  });
  out.metadata["mode"] = "exact";
  out.metadata["levels"] = std::to_string(params_.levels);
  out.metadata["radius"] = std::to_string(params_.radius);
  out.metadata["eta"] = format_double(params_.eta);
  out.metadata["gamma"] = format_double(params_.gamma);
  out.metadata["tau"] = format_double(params_.tau);
  out.metadata["graphs"] = std::to_string(m);
  return out;
}

int ExactMlgEngine::fingerprint_classes(int level) const {
  if (level < 1 || level > params_.levels)
    throw invalid_input("fingerprint_classes: level out of range");
  return class_count_[static_cast<std::size_t>(level - 1)];
}

GramMatrix gram_exact(const std::vector<Graph>& graphs, const MlsParams& params, int threads) {
  ExactMlgEngine engine(graphs, params);
  return engine.gram(threads);
}

}  // namespace mlg
