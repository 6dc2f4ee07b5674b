#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "gda/clustering.hpp"
#include "gda/graph.hpp"

namespace gda {

// Lossless two-level encoding of a node's neighborhood: which clusters it
// touches (inter row, length K) and which member slots inside each touched
// cluster (intra row, length capacity, slots ordered by ascending global node
// id). Stored sparsely: only touched clusters keep a member list.
struct NeighborMaps {
  struct ClusterRow {
    int cluster = 0;
    std::vector<int> members;  // member slots within the cluster, ascending
  };

  int n_nodes = 0;
  int n_clusters = 0;
  int capacity = 0;
  std::vector<std::vector<ClusterRow>> rows;  // per node, ascending cluster id

  // Dense 0/1 views used as reconstruction targets.
  Eigen::VectorXd inter_row(int node) const;
  Eigen::VectorXd intra_row(int node, int cluster) const;
  // Member list for (node, cluster); empty when the cluster is untouched.
  const std::vector<int>* find_row(int node, int cluster) const;
};

// Neighborhoods come from the raw adjacency (self-loops excluded).
NeighborMaps build_neighbor_maps(const AttributedGraph& g, const ClusterAssignment& c);

// Exact inverse of build_neighbor_maps: sorted unique undirected edges.
// Throws if a member slot lies beyond the actual size of its cluster.
std::vector<std::pair<int, int>> neighbor_maps_to_adjacency(const NeighborMaps& nm,
                                                            const ClusterAssignment& c);

}  // namespace gda
