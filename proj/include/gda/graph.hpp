#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

namespace gda {

enum class Split : std::uint8_t { train, val, test, none };

constexpr int kUnlabeled = -1;

// One undirected attributed graph. Edges are unordered pairs stored once as
// (min, max), sorted; no self loops. Labels use kUnlabeled as the sentinel.
struct AttributedGraph {
  int n_nodes = 0;
  Eigen::MatrixXd attributes;              // N×D, row i = node i
  std::vector<std::pair<int, int>> edges;  // unique, u < v, sorted
  std::vector<int> labels;                 // size N
  std::vector<Split> split;                // size N

  int dim() const { return static_cast<int>(attributes.cols()); }
  // Number of classes = 1 + max label over labeled nodes (0 if none).
  int n_classes() const;
  // Sorted neighbor lists, both directions, excluding self.
  std::vector<std::vector<int>> adjacency() const;
  std::vector<int> nodes_in_split(Split s) const;
  // Checks the structural invariants; throws on violation.
  void validate() const;
};

AttributedGraph load_graph(const std::string& features_path, const std::string& edges_path,
                           const std::string& labels_path);
void save_graph(const AttributedGraph& g, const std::string& features_path,
                const std::string& edges_path, const std::string& labels_path);

// Fraction of edges whose (labeled) endpoints share a class; edges with an
// unlabeled endpoint are excluded from both counts. Throws if no edge counts.
double homophily_ratio(const AttributedGraph& g);

// 2|E|/N; 0 for an empty graph.
double average_degree(const AttributedGraph& g);

const char* split_name(Split s);
Split split_from_name(const std::string& s);

}  // namespace gda
