#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace gda {

// Balanced K-means output. Every cluster holds at most capacity = ⌈N/K⌉
// points; within a cluster, members are indexed by ascending global node id.
struct ClusterAssignment {
  int k = 0;
  int capacity = 0;
  std::vector<int> cluster_of;        // size N
  std::vector<int> index_in_cluster;  // size N, position within members[cluster]
  std::vector<std::vector<int>> members;  // per cluster, ascending node id

  int cluster_size(int c) const { return static_cast<int>(members[static_cast<std::size_t>(c)].size()); }
  void validate(int n) const;  // throws on a violated invariant
};

// Lloyd-style balanced K-means. Each assignment step fills clusters greedily
// by ascending point-to-centroid distance (ties by node id, then cluster id),
// skipping full clusters; a cluster that would end up empty steals the point
// farthest from its current centroid. k-means++ seeding with a few restarts,
// all driven by `seed`; the best within-cluster cost wins.
ClusterAssignment balanced_kmeans(const Eigen::MatrixXd& x, int k, int max_iters,
                                  std::uint64_t seed, int restarts = 4,
                                  bool row_normalize = false);

// Sum over points of the squared distance to their cluster mean.
double within_cluster_cost(const Eigen::MatrixXd& x, const ClusterAssignment& a);

}  // namespace gda
