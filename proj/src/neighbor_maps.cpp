#include "gda/neighbor_maps.hpp"

#include <algorithm>
#include <stdexcept>

namespace gda {

Eigen::VectorXd NeighborMaps::inter_row(int node) const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n_clusters);
  for (const auto& row : rows[static_cast<std::size_t>(node)]) c[row.cluster] = 1.0;
  return c;
}

Eigen::VectorXd NeighborMaps::intra_row(int node, int cluster) const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(capacity);
  if (const auto* members = find_row(node, cluster))
    for (const int slot : *members) m[slot] = 1.0;
  return m;
}

const std::vector<int>* NeighborMaps::find_row(int node, int cluster) const {
  const auto& node_rows = rows[static_cast<std::size_t>(node)];
  const auto it = std::lower_bound(
      node_rows.begin(), node_rows.end(), cluster,
      [](const ClusterRow& row, int c) { return row.cluster < c; });
  if (it == node_rows.end() || it->cluster != cluster) return nullptr;
  return &it->members;
}

NeighborMaps build_neighbor_maps(const AttributedGraph& g, const ClusterAssignment& c) {
  c.validate(g.n_nodes);
  NeighborMaps nm;
  nm.n_nodes = g.n_nodes;
  nm.n_clusters = c.k;
  nm.capacity = c.capacity;
  nm.rows.assign(static_cast<std::size_t>(g.n_nodes), {});
  const auto adj = g.adjacency();
  for (int i = 0; i < g.n_nodes; ++i) {
    auto& node_rows = nm.rows[static_cast<std::size_t>(i)];
    for (const int j : adj[static_cast<std::size_t>(i)]) {
      const int cj = c.cluster_of[static_cast<std::size_t>(j)];
      if (node_rows.empty() || node_rows.back().cluster != cj) {
        // adjacency is ascending by neighbor id, not cluster id, so insert in order
        auto it = std::lower_bound(
            node_rows.begin(), node_rows.end(), cj,
            [](const NeighborMaps::ClusterRow& row, int cc) { return row.cluster < cc; });
        if (it == node_rows.end() || it->cluster != cj)
          it = node_rows.insert(it, NeighborMaps::ClusterRow{cj, {}});
        it->members.push_back(c.index_in_cluster[static_cast<std::size_t>(j)]);
      } else {
        node_rows.back().members.push_back(c.index_in_cluster[static_cast<std::size_t>(j)]);
      }
    }
    for (auto& row : node_rows) std::sort(row.members.begin(), row.members.end());
  }
  return nm;
}

std::vector<std::pair<int, int>> neighbor_maps_to_adjacency(const NeighborMaps& nm,
                                                            const ClusterAssignment& c) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < nm.n_nodes; ++i) {
    for (const auto& row : nm.rows[static_cast<std::size_t>(i)]) {
      const auto& members = c.members[static_cast<std::size_t>(row.cluster)];
      for (const int slot : row.members) {
        if (slot < 0 || slot >= static_cast<int>(members.size()))
          throw std::runtime_error("neighbor_maps_to_adjacency: member slot beyond cluster size");
        const int j = members[static_cast<std::size_t>(slot)];
        edges.emplace_back(std::min(i, j), std::max(i, j));
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace gda
