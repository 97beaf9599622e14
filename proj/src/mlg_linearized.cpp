#include "mlg/mlg_linearized.hpp"

#include <algorithm>
#include <string>

#include "mlg/parallel.hpp"
#include "mlg/random.hpp"

namespace mlg {

namespace {

std::vector<std::int64_t> vertex_offsets(const std::vector<Graph>& graphs) {
  std::vector<std::int64_t> offset;
  offset.reserve(graphs.size() + 1);
  offset.push_back(0);
  for (const auto& g : graphs) offset.push_back(offset.back() + g.n);
  return offset;
}

void warn(const PipelineParams& params, const std::string& message) {
  if (params.warn) params.warn(message);
}

std::string join_ids(const std::vector<std::int64_t>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i]);
  }
  return out;
}

}  // namespace

void validate(const PipelineParams& p) {
  if (p.levels < 1) throw invalid_input("PipelineParams: levels must be >= 1");
  if (p.radius < 1) throw invalid_input("PipelineParams: radius must be >= 1");
  if (p.n_samples < 1) throw invalid_input("PipelineParams: n_samples must be >= 1");
  if (p.rank < 1) throw invalid_input("PipelineParams: rank must be >= 1");
  if (p.threads < 1) throw invalid_input("PipelineParams: threads must be >= 1");
  validate(FlgParams{p.eta, p.gamma, p.tau});
}

std::vector<std::int64_t> sample_vertices(const std::vector<Graph>& graphs, int n_samples,
                                          std::mt19937_64& rng) {
  const auto offset = vertex_offsets(graphs);
  const std::int64_t total = offset.back();
  if (n_samples < 1) throw invalid_input("sample_vertices: n_samples must be >= 1");
  if (n_samples > total)
    throw invalid_input("sample_vertices: requested " + std::to_string(n_samples) +
                        " samples from " + std::to_string(total) + " vertices");
  return sample_without_replacement(total, n_samples, rng);
}

LinearizedLevel linearize_level(int level, const std::vector<Graph>& graphs,
                                const std::vector<NeighborhoodStack>& stacks,
                                const std::vector<Matrix>& prev_features,
                                const PipelineParams& params, std::mt19937_64& rng) {
  validate(params);
  if (level < 1 || level > params.levels)
    throw invalid_input("linearize_level: level out of range");
  if (graphs.empty()) throw invalid_input("linearize_level: empty graph collection");
  if (stacks.size() != graphs.size() || prev_features.size() != graphs.size())
    throw invalid_input("linearize_level: need one stack and one feature block per graph");
  const Eigen::Index dim = prev_features.front().cols();
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    if (prev_features[g].rows() != graphs[g].n || prev_features[g].cols() != dim)
      throw invalid_input("linearize_level: feature block shape mismatch at graph " +
                          std::to_string(g));
  }

  const auto offset = vertex_offsets(graphs);
  const std::int64_t total = offset.back();

  // One S matrix (as a reusable Bhattacharyya term) per vertex, built from
  // its level-l subgraph and the previous level's feature rows.
  std::vector<BhattTerm> terms(static_cast<std::size_t>(total));
  parallel_for(total, params.threads, [&](std::int64_t v) {
    const int gi = static_cast<int>(
        std::upper_bound(offset.begin(), offset.end(), v) - offset.begin() - 1);
    const int lv = static_cast<int>(v - offset[static_cast<std::size_t>(gi)]);
    const Subgraph& sub = stacks[static_cast<std::size_t>(gi)]
                              .subgraphs[static_cast<std::size_t>(lv)][static_cast<std::size_t>(level - 1)];
    Matrix u(dim, sub.graph.n);
    for (int i = 0; i < sub.graph.n; ++i)
      u.col(i) = prev_features[static_cast<std::size_t>(gi)]
                     .row(sub.parent[static_cast<std::size_t>(i)])
                     .transpose();
    terms[static_cast<std::size_t>(v)] =
        bhatt_term(s_matrix_explicit(u, laplacian(sub.graph, params.eta), params.gamma));
  });

  LinearizedLevel out;
  out.level = level;
  int n_samples = params.n_samples;
  if (n_samples > total) {
    warn(params, "level " + std::to_string(level) + ": sample size reduced to the " +
                     std::to_string(total) + " available vertices");
    n_samples = static_cast<int>(total);
  }
  out.sample = sample_vertices(graphs, n_samples, rng);

  // Kernel of every vertex against every sampled vertex; the rows at the
  // sampled ids form the sample Gram matrix itself.
  Matrix c(total, n_samples);
  parallel_for(total, params.threads, [&](std::int64_t v) {
    for (int a = 0; a < n_samples; ++a)
      c(v, a) = bhattacharyya_ratio(terms[static_cast<std::size_t>(v)],
                                    terms[static_cast<std::size_t>(out.sample[static_cast<std::size_t>(a)])]);
  });
  Matrix gram(n_samples, n_samples);
  for (int a = 0; a < n_samples; ++a) gram.row(a) = c.row(out.sample[static_cast<std::size_t>(a)]);
  gram = ((gram + gram.transpose()) / 2.0).eval();

  const SymEig eig = sym_eig(gram, params.tau);
  const double lambda_max = eig.values.size() > 0 ? eig.values(0) : 0.0;
  if (eig.min_eigenvalue < -1e-8 * std::max(lambda_max, 0.0))
    throw base_kernel_violation("linearize_level: sample Gram matrix is not PSD (eigenvalue " +
                                std::to_string(eig.min_eigenvalue) + ")");
  int rank = static_cast<int>(eig.values.size());
  if (rank < params.rank)
    warn(params, "level " + std::to_string(level) + ": spectrum supports rank " +
                     std::to_string(rank) + " < requested " + std::to_string(params.rank));
  rank = std::min(rank, params.rank);
  out.rank = rank;
  out.eigenvalues = eig.values.head(rank);
  out.sample_vectors = eig.vectors.leftCols(rank);

  // Nystrom projection of every vertex onto the retained eigenvectors.
  Matrix q = c * out.sample_vectors * out.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal();
  out.features.reserve(graphs.size());
  for (std::size_t g = 0; g < graphs.size(); ++g)
    out.features.push_back(q.middleRows(offset[g], graphs[g].n));
  return out;
}

std::vector<Matrix> s_matrices_per_graph(const std::vector<Graph>& graphs,
                                         const LinearizedLevel& top, double eta, double gamma) {
  if (top.features.size() != graphs.size())
    throw invalid_input("s_matrices_per_graph: need one feature block per graph");
  std::vector<Matrix> out(graphs.size());
  for (std::size_t g = 0; g < graphs.size(); ++g)
    out[g] = s_matrix_explicit(top.features[g].transpose(), laplacian(graphs[g], eta), gamma);
  return out;
}

GramMatrix gram_linearized(const std::vector<Graph>& graphs, const PipelineParams& params) {
  validate(params);
  if (graphs.empty()) throw invalid_input("gram_linearized: empty graph collection");
  const Eigen::Index dim = graphs.front().feature_dim();
  std::vector<Matrix> prev;
  prev.reserve(graphs.size());
  for (const auto& g : graphs) {
    if (g.feature_dim() != dim)
      throw invalid_input("gram_linearized: graphs disagree on feature dimension");
    prev.push_back(g.features.size() == 0 ? Matrix::Zero(g.n, 0) : g.features);
  }

  std::vector<NeighborhoodStack> stacks(graphs.size());
  parallel_for(static_cast<std::int64_t>(graphs.size()), params.threads, [&](std::int64_t g) {
    stacks[static_cast<std::size_t>(g)] =
        build_neighborhood_stack(graphs[static_cast<std::size_t>(g)], params.radius, params.levels);
  });

  GramMatrix out;
  LinearizedLevel top;
  for (int l = 1; l <= params.levels; ++l) {
    // Fresh sample per level, from a level-specific substream of the seed.
    std::mt19937_64 rng(split_seed(params.seed, static_cast<std::uint64_t>(l)));
    top = linearize_level(l, graphs, stacks, prev, params, rng);
    prev = top.features;
    out.metadata["level" + std::to_string(l) + "_sample"] = join_ids(top.sample);
    out.metadata["level" + std::to_string(l) + "_rank"] = std::to_string(top.rank);
  }

  const std::vector<Matrix> s = s_matrices_per_graph(graphs, top, params.eta, params.gamma);
  std::vector<BhattTerm> terms(s.size());
  parallel_for(static_cast<std::int64_t>(s.size()), params.threads,
               [&](std::int64_t g) { terms[static_cast<std::size_t>(g)] = bhatt_term(s[static_cast<std::size_t>(g)]); });

  const std::int64_t m = static_cast<std::int64_t>(graphs.size());
  out.values.resize(m, m);
  parallel_for(triangular_count(m), params.threads, [&](std::int64_t t) {
    const auto [i, j] = triangular_index(t, m);
    const double v = bhattacharyya_ratio(terms[static_cast<std::size_t>(i)], terms[static_cast<std::size_t>(j)]);
    out.values(i, j) = v;
    out.values(j, i) = v;
  });

  out.metadata["mode"] = "linearized";
  out.metadata["levels"] = std::to_string(params.levels);
  out.metadata["radius"] = std::to_string(params.radius);
  out.metadata["eta"] = format_double(params.eta);
  out.metadata["gamma"] = format_double(params.gamma);
  out.metadata["tau"] = format_double(params.tau);
  out.metadata["samples"] = std::to_string(params.n_samples);
  out.metadata["rank"] = std::to_string(params.rank);
  out.metadata["seed"] = std::to_string(params.seed);
  out.metadata["graphs"] = std::to_string(m);
  return out;
}

}  // namespace mlg
