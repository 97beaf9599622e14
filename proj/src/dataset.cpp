#include "mlg/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mlg {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

int parse_int(const std::string& token, const std::string& path, int line) {
  const std::string t = trim(token);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw dataset_error(path + ":" + std::to_string(line) + ": malformed integer '" + token + "'");
  return value;
}

// One integer per non-empty line; tolerates CRLF and trailing whitespace.
std::vector<int> read_int_column(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dataset_error("cannot open " + path);
  std::vector<int> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    out.push_back(parse_int(t, path, lineno));
  }
  return out;
}

}  // namespace

Matrix one_hot_features(const std::vector<int>& node_labels, const std::vector<int>& alphabet) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(node_labels.size()),
                            static_cast<Eigen::Index>(alphabet.size()));
  for (std::size_t i = 0; i < node_labels.size(); ++i) {
    const auto it = std::lower_bound(alphabet.begin(), alphabet.end(), node_labels[i]);
    if (it == alphabet.end() || *it != node_labels[i])
      throw invalid_input("one_hot_features: label " + std::to_string(node_labels[i]) +
                          " is not in the alphabet");
    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(it - alphabet.begin())) = 1.0;
  }
  return out;
}

Dataset load_tu_dataset(const std::string& dir, const std::string& name) {
  namespace fs = std::filesystem;
  const std::string base = (fs::path(dir) / name).string() + "_";
  const std::string a_path = base + "A.txt";
  const std::string indicator_path = base + "graph_indicator.txt";
  const std::string graph_labels_path = base + "graph_labels.txt";
  const std::string node_labels_path = base + "node_labels.txt";

  const std::vector<int> indicator = read_int_column(indicator_path);
  if (indicator.empty()) throw dataset_error(indicator_path + ": no nodes");
  const int n_graphs = *std::max_element(indicator.begin(), indicator.end());
  if (*std::min_element(indicator.begin(), indicator.end()) < 1)
    throw dataset_error(indicator_path + ": graph ids must be >= 1");

  Dataset ds;
  ds.name = name;
  ds.labels = read_int_column(graph_labels_path);
  if (static_cast<int>(ds.labels.size()) != n_graphs)
    throw dataset_error(graph_labels_path + ": " + std::to_string(ds.labels.size()) +
                        " labels for " + std::to_string(n_graphs) + " graphs");

  // Global node id (1-based) -> (graph, local vertex), in file order.
  std::vector<int> graph_of(indicator.size());
  std::vector<int> local_of(indicator.size());
  std::vector<int> counts(static_cast<std::size_t>(n_graphs), 0);
  for (std::size_t i = 0; i < indicator.size(); ++i) {
    const int g = indicator[i] - 1;
    graph_of[i] = g;
    local_of[i] = counts[static_cast<std::size_t>(g)]++;
  }

  std::vector<std::set<std::pair<int, int>>> edge_sets(static_cast<std::size_t>(n_graphs));
  {
    std::ifstream in(a_path);
    if (!in) throw dataset_error("cannot open " + a_path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(line);
      if (t.empty()) continue;
      const std::size_t comma = t.find(',');
      if (comma == std::string::npos)
        throw dataset_error(a_path + ":" + std::to_string(lineno) + ": expected 'u, v'");
      const int u = parse_int(t.substr(0, comma), a_path, lineno);
      const int v = parse_int(t.substr(comma + 1), a_path, lineno);
      if (u < 1 || u > static_cast<int>(indicator.size()) || v < 1 ||
          v > static_cast<int>(indicator.size()))
        throw dataset_error(a_path + ":" + std::to_string(lineno) + ": node id out of range");
      if (u == v) continue;  // drop self-loops
      const int gu = graph_of[static_cast<std::size_t>(u - 1)];
      const int gv = graph_of[static_cast<std::size_t>(v - 1)];
      if (gu != gv)
        throw dataset_error(a_path + ":" + std::to_string(lineno) + ": edge (" +
                            std::to_string(u) + "," + std::to_string(v) +
                            ") crosses graph boundaries");
      int lu = local_of[static_cast<std::size_t>(u - 1)];
      int lv = local_of[static_cast<std::size_t>(v - 1)];
      if (lu > lv) std::swap(lu, lv);
      edge_sets[static_cast<std::size_t>(gu)].insert({lu, lv});
    }
  }

  std::vector<int> node_labels_flat;
  if (fs::exists(node_labels_path)) {
    node_labels_flat = read_int_column(node_labels_path);
    if (node_labels_flat.size() != indicator.size())
      throw dataset_error(node_labels_path + ": " + std::to_string(node_labels_flat.size()) +
                          " labels for " + std::to_string(indicator.size()) + " nodes");
  } else {
    ds.labels_from_degree = true;
  }

  ds.node_labels.assign(static_cast<std::size_t>(n_graphs), {});
  for (int g = 0; g < n_graphs; ++g)
    ds.node_labels[static_cast<std::size_t>(g)].assign(static_cast<std::size_t>(counts[static_cast<std::size_t>(g)]), 0);

  if (!ds.labels_from_degree) {
    for (std::size_t i = 0; i < indicator.size(); ++i)
      ds.node_labels[static_cast<std::size_t>(graph_of[i])][static_cast<std::size_t>(local_of[i])] =
          node_labels_flat[i];
  }

  ds.graphs.reserve(static_cast<std::size_t>(n_graphs));
  for (int g = 0; g < n_graphs; ++g) {
    std::vector<Edge> edges;
    edges.reserve(edge_sets[static_cast<std::size_t>(g)].size());
    for (const auto& [u, v] : edge_sets[static_cast<std::size_t>(g)]) edges.push_back({u, v, 1.0});
    ds.graphs.push_back(make_graph(counts[static_cast<std::size_t>(g)], std::move(edges), Matrix(), g));
  }

  if (ds.labels_from_degree) {
    for (int g = 0; g < n_graphs; ++g) {
      const Graph& graph = ds.graphs[static_cast<std::size_t>(g)];
      for (int v = 0; v < graph.n; ++v)
        ds.node_labels[static_cast<std::size_t>(g)][static_cast<std::size_t>(v)] =
            static_cast<int>(graph.neighbors[static_cast<std::size_t>(v)].size());
    }
  }

  std::set<int> distinct;
  for (const auto& labels : ds.node_labels) distinct.insert(labels.begin(), labels.end());
  ds.alphabet.assign(distinct.begin(), distinct.end());
  for (int g = 0; g < n_graphs; ++g)
    ds.graphs[static_cast<std::size_t>(g)].features =
        one_hot_features(ds.node_labels[static_cast<std::size_t>(g)], ds.alphabet);
  return ds;
}

void save_tu_dataset(const Dataset& ds, const std::string& dir, const std::string& name) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string base = (fs::path(dir) / name).string() + "_";

  std::ofstream a(base + "A.txt");
  std::ofstream ind(base + "graph_indicator.txt");
  std::ofstream gl(base + "graph_labels.txt");
  if (!a || !ind || !gl) throw dataset_error("cannot write dataset files under " + dir);

  std::vector<int> first_id(ds.graphs.size() + 1, 1);
  for (std::size_t g = 0; g < ds.graphs.size(); ++g)
    first_id[g + 1] = first_id[g] + ds.graphs[g].n;

  for (std::size_t g = 0; g < ds.graphs.size(); ++g) {
    for (int v = 0; v < ds.graphs[g].n; ++v) ind << (g + 1) << "\n";
    gl << ds.labels[g] << "\n";
    for (const auto& e : ds.graphs[g].edges) {
      a << (first_id[g] + e.u) << ", " << (first_id[g] + e.v) << "\n";
      a << (first_id[g] + e.v) << ", " << (first_id[g] + e.u) << "\n";
    }
  }
  if (!ds.labels_from_degree && !ds.node_labels.empty()) {
    std::ofstream nl(base + "node_labels.txt");
    if (!nl) throw dataset_error("cannot write dataset files under " + dir);
    for (const auto& labels : ds.node_labels)
      for (int label : labels) nl << label << "\n";
  }
}

namespace {

double graph_diameter(const Graph& g) {
  int best = 0;
  std::vector<int> dist(static_cast<std::size_t>(g.n));
  for (int s = 0; s < g.n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::deque<int> queue{s};
    dist[static_cast<std::size_t>(s)] = 0;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      best = std::max(best, dist[static_cast<std::size_t>(v)]);
      for (int u : g.neighbors[static_cast<std::size_t>(v)]) {
        if (dist[static_cast<std::size_t>(u)] < 0) {
          dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
          queue.push_back(u);
        }
      }
    }
  }
  return best;
}

}  // namespace

DatasetStats dataset_stats(const Dataset& ds) {
  DatasetStats s;
  s.name = ds.name;
  s.n_graphs = static_cast<int>(ds.graphs.size());
  s.alphabet_size = static_cast<int>(ds.alphabet.size());
  std::map<int, int> counts;
  for (int label : ds.labels) ++counts[label];
  s.class_counts.assign(counts.begin(), counts.end());
  if (ds.graphs.empty()) return s;
  double nodes = 0, edges = 0, diameter = 0;
  for (const auto& g : ds.graphs) {
    nodes += g.n;
    edges += static_cast<double>(g.edges.size());
    diameter += graph_diameter(g);
  }
  const double m = static_cast<double>(ds.graphs.size());
  s.mean_nodes = nodes / m;
  s.mean_edges_undirected = edges / m;
  s.mean_edges_directed = 2.0 * edges / m;
  s.mean_diameter = diameter / m;
  return s;
}

std::string format_stats(const DatasetStats& s) {
  std::ostringstream out;
  out << "dataset            " << s.name << "\n";
  out << "graphs             " << s.n_graphs << "\n";
  out << "classes            ";
  for (std::size_t i = 0; i < s.class_counts.size(); ++i) {
    if (i) out << ", ";
    out << s.class_counts[i].first << ": " << s.class_counts[i].second;
  }
  out << "\n";
  out << "node label alphabet " << s.alphabet_size << "\n";
  out.setf(std::ios::fixed);
  out.precision(2);
  out << "mean nodes         " << s.mean_nodes << "\n";
  out << "mean edges         " << s.mean_edges_undirected << " undirected (" << s.mean_edges_directed
      << " directed half-edges)\n";
  out << "mean diameter      " << s.mean_diameter << "\n";
  return out.str();
}

}  // namespace mlg
