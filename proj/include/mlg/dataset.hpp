#pragma once

// Loader for the common benchmark text layout: <name>_A.txt lists both
// directions of every undirected edge as comma-separated 1-based global node
// ids, <name>_graph_indicator.txt maps nodes to graphs, <name>_graph_labels.txt
// holds one class label per graph, and optional <name>_node_labels.txt holds
// one integer label per node. Node ids become 0-based per-graph vertex ids in
// file order; edges are deduplicated, self-loops dropped, weights set to 1.
// When node labels are absent the vertex degree stands in as the label.
// Vertex features are one-hot rows over the sorted distinct labels.

#include <string>
#include <vector>

#include "mlg/graph.hpp"

namespace mlg {

struct Dataset {
  std::string name;
  std::vector<Graph> graphs;                  // features = one-hot label rows
  std::vector<int> labels;                    // class label per graph, as given
  std::vector<std::vector<int>> node_labels;  // raw node labels per graph
  std::vector<int> alphabet;                  // distinct node labels, sorted
  bool labels_from_degree = false;            // node label file was absent
};

Dataset load_tu_dataset(const std::string& dir, const std::string& name);

// Writes the same four-file layout (node labels only when present as such).
void save_tu_dataset(const Dataset& ds, const std::string& dir, const std::string& name);

// One-hot rows: column j of row i is 1 iff node_labels[i] == alphabet[j].
Matrix one_hot_features(const std::vector<int>& node_labels, const std::vector<int>& alphabet);

struct DatasetStats {
  std::string name;
  int n_graphs = 0;
  std::vector<std::pair<int, int>> class_counts;  // (class label, count) sorted by label
  double mean_nodes = 0.0;
  double mean_edges_undirected = 0.0;
  double mean_edges_directed = 0.0;  // undirected count doubled (file convention)
  double mean_diameter = 0.0;        // max over components, unweighted hops
  int alphabet_size = 0;
};

DatasetStats dataset_stats(const Dataset& ds);
std::string format_stats(const DatasetStats& s);

}  // namespace mlg
