#include <doctest.h>

#include <numeric>
#include <vector>

#include "gda/clustering.hpp"
#include "gda/rng.hpp"
#include "helpers.hpp"

using namespace gda;

TEST_SUITE("clustering") {
  TEST_CASE("partition invariants hold on random data") {
    Rng rng(3);
    const Eigen::MatrixXd x = rng.normal_matrix(53, 4);
    const ClusterAssignment a = balanced_kmeans(x, 7, 25, 99);
    a.validate(53);
    CHECK(a.k == 7);
    CHECK(a.capacity == 8);  // ceil(53/7)
    int total = 0;
    for (int c = 0; c < a.k; ++c) {
      CHECK(a.cluster_size(c) >= 1);
      CHECK(a.cluster_size(c) <= a.capacity);
      total += a.cluster_size(c);
    }
    CHECK(total == 53);
    CHECK(within_cluster_cost(x, a) > 0.0);
  }

  TEST_CASE("within_cluster_cost matches a hand computation") {
    Eigen::MatrixXd x(4, 1);
    x << 0.0, 1.0, 10.0, 11.0;
    ClusterAssignment a;
    a.k = 2;
    a.capacity = 2;
    a.cluster_of = {0, 0, 1, 1};
    a.index_in_cluster = {0, 1, 0, 1};
    a.members = {{0, 1}, {2, 3}};
    a.validate(4);
    // means 0.5 and 10.5; four squared deviations of 0.25
    CHECK(within_cluster_cost(x, a) == doctest::Approx(1.0));
  }

  TEST_CASE("recovers the optimal balanced 2-partition of separated points") {
    // brute-force oracle: all 252 ways to split 10 points into 5+5
    Rng rng(17);
    Eigen::MatrixXd x(10, 1);
    for (int i = 0; i < 5; ++i) x(i, 0) = 0.0 + 0.1 * rng.normal();
    for (int i = 5; i < 10; ++i) x(i, 0) = 10.0 + 0.1 * rng.normal();

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> pick(10);
    for (int mask = 0; mask < (1 << 10); ++mask) {
      if (__builtin_popcount(static_cast<unsigned>(mask)) != 5) continue;
      double m0 = 0, m1 = 0;
      for (int i = 0; i < 10; ++i) ((mask >> i) & 1 ? m1 : m0) += x(i, 0);
      m0 /= 5;
      m1 /= 5;
      double cost = 0;
      for (int i = 0; i < 10; ++i) {
        const double mu = ((mask >> i) & 1) ? m1 : m0;
        cost += (x(i, 0) - mu) * (x(i, 0) - mu);
      }
      best = std::min(best, cost);
    }

    const ClusterAssignment a = balanced_kmeans(x, 2, 50, 5);
    CHECK(within_cluster_cost(x, a) == doctest::Approx(best).epsilon(1e-9));
    // the well-separated blobs end up in different clusters
    for (int i = 1; i < 5; ++i) CHECK(a.cluster_of[static_cast<std::size_t>(i)] == a.cluster_of[0]);
    for (int i = 6; i < 10; ++i) CHECK(a.cluster_of[static_cast<std::size_t>(i)] == a.cluster_of[5]);
    CHECK(a.cluster_of[0] != a.cluster_of[5]);
  }

  TEST_CASE("one cluster per point is allowed") {
    Rng rng(8);
    const Eigen::MatrixXd x = rng.normal_matrix(6, 2);
    const ClusterAssignment a = balanced_kmeans(x, 6, 10, 4);
    a.validate(6);
    CHECK(a.capacity == 1);
    for (int c = 0; c < 6; ++c) CHECK(a.cluster_size(c) == 1);
  }

  TEST_CASE("duplicate points still populate every cluster") {
    // all points identical: k-means++ degenerates, empty clusters must be
    // repopulated by the stealing rule
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(9, 3);
    const ClusterAssignment a = balanced_kmeans(x, 4, 10, 21);
    a.validate(9);
    for (int c = 0; c < 4; ++c) CHECK(a.cluster_size(c) >= 1);
    CHECK(within_cluster_cost(x, a) == doctest::Approx(0.0));
  }

  TEST_CASE("argument validation") {
    Rng rng(1);
    const Eigen::MatrixXd x = rng.normal_matrix(5, 2);
    CHECK_THROWS_AS(balanced_kmeans(x, 0, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(balanced_kmeans(x, -2, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(balanced_kmeans(x, 6, 10, 1), std::invalid_argument);
  }

  TEST_CASE("validate flags broken assignments") {
    ClusterAssignment a = testutil::random_clusters(10, 3, 2);
    a.validate(10);
    ClusterAssignment b = a;
    b.cluster_of[0] = 99;
    CHECK_THROWS(b.validate(10));
    ClusterAssignment c = a;
    c.members[0].clear();
    CHECK_THROWS(c.validate(10));
    ClusterAssignment d = a;
    d.capacity = 1;
    CHECK_THROWS(d.validate(10));
  }

  TEST_CASE("same seed, same clustering; restarts improve or match cost") {
    Rng rng(5);
    const Eigen::MatrixXd x = rng.normal_matrix(40, 3);
    const ClusterAssignment a1 = balanced_kmeans(x, 5, 30, 77);
    const ClusterAssignment a2 = balanced_kmeans(x, 5, 30, 77);
    CHECK(a1.cluster_of == a2.cluster_of);
    const ClusterAssignment one = balanced_kmeans(x, 5, 30, 77, 1);
    const ClusterAssignment many = balanced_kmeans(x, 5, 30, 77, 6);
    CHECK(within_cluster_cost(x, many) <= within_cluster_cost(x, one) + 1e-12);
  }

  TEST_CASE("row normalization clusters by direction, not magnitude") {
    Rng rng(9);
    Eigen::MatrixXd x = rng.normal_matrix(30, 4);
    Eigen::MatrixXd scaled = x;
    for (Eigen::Index i = 0; i < scaled.rows(); ++i)
      scaled.row(i) *= 1.0 + static_cast<double>(i % 7);
    const ClusterAssignment a = balanced_kmeans(x, 4, 30, 13, 4, true);
    const ClusterAssignment b = balanced_kmeans(scaled, 4, 30, 13, 4, true);
    CHECK(a.cluster_of == b.cluster_of);
  }
}
