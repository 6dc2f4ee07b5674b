#pragma once

// Shared builders for the test suites: small synthetic datasets, random
// graphs and cluster assignments, scratch directories.

#include <Eigen/Dense>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gda/clustering.hpp"
#include "gda/graph.hpp"
#include "gda/rng.hpp"

namespace testutil {

// Class-blob attributed graph: attributes cluster around one axis per class,
// edges form a ring inside each class plus a few cross-class links, splits
// are dealt round-robin (4 train : 3 val : 3 test per 10 nodes of a class).
inline gda::AttributedGraph toy_graph(int n, int n_classes, int dim, std::uint64_t seed,
                                      double cross_p = 0.05) {
  gda::Rng rng(seed);
  gda::AttributedGraph g;
  g.n_nodes = n;
  g.attributes.resize(n, dim);
  g.labels.resize(static_cast<std::size_t>(n));
  g.split.resize(static_cast<std::size_t>(n));

  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(n_classes));
  for (int v = 0; v < n; ++v) {
    const int c = v % n_classes;
    g.labels[static_cast<std::size_t>(v)] = c;
    by_class[static_cast<std::size_t>(c)].push_back(v);
    for (int j = 0; j < dim; ++j) {
      const double center = (j == c % dim) ? 3.0 : 0.0;
      g.attributes(v, j) = center + 0.3 * rng.normal();
    }
    const int pos = v / n_classes;
    const int r = pos % 10;
    g.split[static_cast<std::size_t>(v)] =
        r < 4 ? gda::Split::train : (r < 7 ? gda::Split::val : gda::Split::test);
  }

  std::set<std::pair<int, int>> edges;
  auto add_edge = [&](int u, int v) {
    if (u == v) return;
    edges.insert({std::min(u, v), std::max(u, v)});
  };
  for (const auto& members : by_class) {
    const int m = static_cast<int>(members.size());
    for (int i = 0; i + 1 < m; ++i) add_edge(members[static_cast<std::size_t>(i)],
                                             members[static_cast<std::size_t>(i + 1)]);
    if (m > 2) add_edge(members.front(), members.back());
  }
  for (int v = 0; v < n; ++v) {
    if (rng.uniform() < cross_p) add_edge(v, static_cast<int>(rng.uniform_int(0, n - 1)));
  }
  g.edges.assign(edges.begin(), edges.end());
  g.validate();
  return g;
}

inline gda::AttributedGraph random_graph(int n, double p, int dim, std::uint64_t seed) {
  gda::Rng rng(seed);
  gda::AttributedGraph g;
  g.n_nodes = n;
  g.attributes = rng.normal_matrix(n, dim);
  g.labels.assign(static_cast<std::size_t>(n), 0);
  g.split.assign(static_cast<std::size_t>(n), gda::Split::none);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.uniform() < p) g.edges.emplace_back(u, v);
    }
  }
  g.validate();
  return g;
}

// Balanced assignment by dealing a shuffled node order round-robin; capacity
// matches the ceil(n/k) contract.
inline gda::ClusterAssignment random_clusters(int n, int k, std::uint64_t seed) {
  gda::Rng rng(seed);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);
  gda::ClusterAssignment a;
  a.k = k;
  a.capacity = (n + k - 1) / k;
  a.cluster_of.resize(static_cast<std::size_t>(n));
  a.index_in_cluster.resize(static_cast<std::size_t>(n));
  a.members.assign(static_cast<std::size_t>(k), {});
  for (int i = 0; i < n; ++i) {
    a.members[static_cast<std::size_t>(i % k)].push_back(order[static_cast<std::size_t>(i)]);
  }
  for (int c = 0; c < k; ++c) {
    auto& m = a.members[static_cast<std::size_t>(c)];
    std::sort(m.begin(), m.end());
    for (std::size_t i = 0; i < m.size(); ++i) {
      a.cluster_of[static_cast<std::size_t>(m[i])] = c;
      a.index_in_cluster[static_cast<std::size_t>(m[i])] = static_cast<int>(i);
    }
  }
  a.validate(n);
  return a;
}

// ./test_tmp/<name>, wiped on entry.
inline std::string fresh_dir(const std::string& name) {
  const std::string dir = "test_tmp/" + name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace testutil
