#include "gda/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "gda/rng.hpp"

namespace gda {
namespace {

// Squared distances point-to-centroid as an N×K matrix, computed via
// ‖x‖² + ‖c‖² − 2·x·cᵀ so the heavy part is one GEMM.
Eigen::MatrixXd sq_distances(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids) {
  const Eigen::VectorXd xn = x.rowwise().squaredNorm();
  const Eigen::VectorXd cn = centroids.rowwise().squaredNorm();
  Eigen::MatrixXd d = -2.0 * (x * centroids.transpose());
  d.colwise() += xn;
  d.rowwise() += cn.transpose();
  return d.cwiseMax(0.0);
}

Eigen::MatrixXd kmeanspp_init(const Eigen::MatrixXd& x, int k, Rng& rng) {
  const auto n = x.rows();
  Eigen::MatrixXd centroids(k, x.cols());
  const auto first = static_cast<Eigen::Index>(rng.uniform_int(0, n - 1));
  centroids.row(0) = x.row(first);
  Eigen::VectorXd best = (x.rowwise() - x.row(first)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = best.sum();
    Eigen::Index pick = 0;
    if (total <= 0.0) {
      // all remaining points coincide with a chosen centroid: pick uniformly
      pick = static_cast<Eigen::Index>(rng.uniform_int(0, n - 1));
    } else {
      double r = rng.uniform() * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        r -= best[i];
        if (r <= 0.0) {
          pick = i;
          break;
        }
        pick = i;
      }
    }
    centroids.row(c) = x.row(pick);
    best = best.cwiseMin((x.rowwise() - x.row(pick)).rowwise().squaredNorm());
  }
  return centroids;
}

// Capacity-constrained assignment: visit (distance, node, cluster) triples in
// ascending order and take the first admissible cluster for each node.
std::vector<int> greedy_assign(const Eigen::MatrixXd& d2, int capacity) {
  const auto n = d2.rows();
  const auto k = d2.cols();
  std::vector<std::tuple<double, int, int>> order;
  order.reserve(static_cast<std::size_t>(n * k));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < k; ++c)
      order.emplace_back(d2(i, c), static_cast<int>(i), static_cast<int>(c));
  std::sort(order.begin(), order.end());

  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  std::vector<int> size(static_cast<std::size_t>(k), 0);
  Eigen::Index placed = 0;
  for (const auto& [dist, i, c] : order) {
    (void)dist;
    if (placed == n) break;
    if (assign[static_cast<std::size_t>(i)] >= 0) continue;
    if (size[static_cast<std::size_t>(c)] >= capacity) continue;
    assign[static_cast<std::size_t>(i)] = c;
    ++size[static_cast<std::size_t>(c)];
    ++placed;
  }
  return assign;
}

// Every cluster must stay populated: an empty one steals the point that sits
// farthest from its nearest centroid (among clusters that can spare a member).
void fill_empty_clusters(const Eigen::MatrixXd& d2, std::vector<int>& assign, int k) {
  std::vector<int> size(static_cast<std::size_t>(k), 0);
  for (const int c : assign) ++size[static_cast<std::size_t>(c)];
  for (int c = 0; c < k; ++c) {
    while (size[static_cast<std::size_t>(c)] == 0) {
      int worst = -1;
      double worst_d = -1.0;
      for (std::size_t i = 0; i < assign.size(); ++i) {
        const int ci = assign[i];
        if (size[static_cast<std::size_t>(ci)] <= 1) continue;
        const double di = d2.row(static_cast<Eigen::Index>(i)).minCoeff();
        if (di > worst_d) {
          worst_d = di;
          worst = static_cast<int>(i);
        }
      }
      if (worst < 0) throw std::runtime_error("balanced_kmeans: cannot populate empty cluster");
      --size[static_cast<std::size_t>(assign[static_cast<std::size_t>(worst)])];
      assign[static_cast<std::size_t>(worst)] = c;
      ++size[static_cast<std::size_t>(c)];
    }
  }
}

Eigen::MatrixXd cluster_means(const Eigen::MatrixXd& x, const std::vector<int>& assign, int k) {
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, x.cols());
  std::vector<int> size(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    means.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
    ++size[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
  }
  for (int c = 0; c < k; ++c)
    if (size[static_cast<std::size_t>(c)] > 0) means.row(c) /= size[static_cast<std::size_t>(c)];
  return means;
}

double assignment_cost(const Eigen::MatrixXd& x, const std::vector<int>& assign, int k) {
  const Eigen::MatrixXd means = cluster_means(x, assign, k);
  double cost = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    cost += (x.row(i) - means.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
  return cost;
}

ClusterAssignment finalize(std::vector<int> assign, int n, int k, int capacity) {
  ClusterAssignment a;
  a.k = k;
  a.capacity = capacity;
  a.cluster_of = std::move(assign);
  a.members.assign(static_cast<std::size_t>(k), {});
  for (int i = 0; i < n; ++i)  // ascending node id by construction
    a.members[static_cast<std::size_t>(a.cluster_of[static_cast<std::size_t>(i)])].push_back(i);
  a.index_in_cluster.assign(static_cast<std::size_t>(n), -1);
  for (int c = 0; c < k; ++c)
    for (std::size_t m = 0; m < a.members[static_cast<std::size_t>(c)].size(); ++m)
      a.index_in_cluster[static_cast<std::size_t>(a.members[static_cast<std::size_t>(c)][m])] =
          static_cast<int>(m);
  a.validate(n);
  return a;
}

}  // namespace

void ClusterAssignment::validate(int n) const {
  if (k <= 0 || static_cast<int>(members.size()) != k)
    throw std::runtime_error("cluster assignment: bad cluster count");
  if (static_cast<int>(cluster_of.size()) != n || static_cast<int>(index_in_cluster.size()) != n)
    throw std::runtime_error("cluster assignment: size mismatch");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int c = 0; c < k; ++c) {
    const auto& mem = members[static_cast<std::size_t>(c)];
    if (static_cast<int>(mem.size()) > capacity)
      throw std::runtime_error("cluster assignment: capacity exceeded");
    for (std::size_t m = 0; m < mem.size(); ++m) {
      const int i = mem[m];
      if (i < 0 || i >= n || seen[static_cast<std::size_t>(i)])
        throw std::runtime_error("cluster assignment: members not a partition");
      seen[static_cast<std::size_t>(i)] = 1;
      if (m > 0 && mem[m - 1] >= i)
        throw std::runtime_error("cluster assignment: members not ascending");
      if (cluster_of[static_cast<std::size_t>(i)] != c ||
          index_in_cluster[static_cast<std::size_t>(i)] != static_cast<int>(m))
        throw std::runtime_error("cluster assignment: inconsistent index maps");
    }
  }
  for (int i = 0; i < n; ++i)
    if (!seen[static_cast<std::size_t>(i)])
      throw std::runtime_error("cluster assignment: node unassigned");
}

double within_cluster_cost(const Eigen::MatrixXd& x, const ClusterAssignment& a) {
  return assignment_cost(x, a.cluster_of, a.k);
}

ClusterAssignment balanced_kmeans(const Eigen::MatrixXd& x_in, int k, int max_iters,
                                  std::uint64_t seed, int restarts, bool row_normalize) {
  const auto n = x_in.rows();
  if (k <= 0) throw std::invalid_argument("balanced_kmeans: k must be positive");
  if (k > n) throw std::invalid_argument("balanced_kmeans: k exceeds point count");
  Eigen::MatrixXd x = x_in;
  if (row_normalize)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double norm = x.row(i).norm();
      if (norm > 0) x.row(i) /= norm;
    }
  const int capacity = static_cast<int>((n + k - 1) / k);

  Rng base(seed);
  std::vector<int> best_assign;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < std::max(1, restarts); ++restart) {
    Rng rng = base.fork(static_cast<std::uint64_t>(restart));
    Eigen::MatrixXd centroids = kmeanspp_init(x, k, rng);
    std::vector<int> assign;
    for (int iter = 0; iter < std::max(1, max_iters); ++iter) {
      const Eigen::MatrixXd d2 = sq_distances(x, centroids);
      std::vector<int> next = greedy_assign(d2, capacity);
      fill_empty_clusters(d2, next, k);
      if (next == assign) break;
      assign = std::move(next);
      centroids = cluster_means(x, assign, k);
    }
    const double cost = assignment_cost(x, assign, k);
    if (cost < best_cost) {
      best_cost = cost;
      best_assign = std::move(assign);
    }
  }
  return finalize(std::move(best_assign), static_cast<int>(n), k, capacity);
}

}  // namespace gda
