#include "gda/graph.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>

namespace gda {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

// Splits file content into non-empty lines (string_views into `data`).
std::vector<std::string_view> split_lines(const std::string& data) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= data.size(); ++i) {
    if (i == data.size() || data[i] == '\n') {
      std::size_t end = i;
      while (end > start && is_space(data[end - 1])) --end;
      std::size_t s = start;
      while (s < end && is_space(data[s])) ++s;
      if (s < end) lines.push_back(std::string_view(data).substr(s, end - s));
      start = i + 1;
    }
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_real(std::string_view tok, const std::string& path, std::size_t line_no) {
  double v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed number '" +
                             std::string(tok) + "'");
  return v;
}

long parse_int(std::string_view tok, const std::string& path, std::size_t line_no) {
  long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed integer '" +
                             std::string(tok) + "'");
  return v;
}

}  // namespace

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::none: return "none";
  }
  return "none";
}

Split split_from_name(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  if (s == "none") return Split::none;
  throw std::runtime_error("unknown split tag '" + s + "'");
}

int AttributedGraph::n_classes() const {
  int c = 0;
  for (const int l : labels)
    if (l != kUnlabeled) c = std::max(c, l + 1);
  return c;
}

std::vector<std::vector<int>> AttributedGraph::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_nodes));
  for (const auto& [u, v] : edges) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

std::vector<int> AttributedGraph::nodes_in_split(Split s) const {
  std::vector<int> out;
  for (int i = 0; i < n_nodes; ++i)
    if (split[static_cast<std::size_t>(i)] == s) out.push_back(i);
  return out;
}

void AttributedGraph::validate() const {
  if (attributes.rows() != n_nodes) throw std::runtime_error("attribute row count != n_nodes");
  if (static_cast<int>(labels.size()) != n_nodes || static_cast<int>(split.size()) != n_nodes)
    throw std::runtime_error("labels/split size != n_nodes");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [u, v] = edges[e];
    if (u < 0 || v < 0 || u >= n_nodes || v >= n_nodes)
      throw std::runtime_error("edge endpoint out of range: " + std::to_string(u) + "-" +
                               std::to_string(v));
    if (u == v) throw std::runtime_error("self loop stored: node " + std::to_string(u));
    if (u > v) throw std::runtime_error("edge stored as (max,min): use (min,max)");
    if (e > 0 && !(edges[e - 1] < edges[e]))
      throw std::runtime_error("edges not sorted/unique");
  }
  for (int i = 0; i < n_nodes; ++i)
    if (split[static_cast<std::size_t>(i)] == Split::train &&
        labels[static_cast<std::size_t>(i)] == kUnlabeled)
      throw std::runtime_error("train node " + std::to_string(i) + " has no label");
}

AttributedGraph load_graph(const std::string& features_path, const std::string& edges_path,
                           const std::string& labels_path) {
  AttributedGraph g;

  {
    const std::string data = read_file(features_path);
    const auto lines = split_lines(data);
    g.n_nodes = static_cast<int>(lines.size());
    if (g.n_nodes == 0) throw std::runtime_error(features_path + ": no feature rows");
    const auto first = split_fields(lines[0]);
    const auto dim = static_cast<Eigen::Index>(first.size());
    if (dim == 0) throw std::runtime_error(features_path + ": empty feature row");
    g.attributes.resize(g.n_nodes, dim);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto fields = split_fields(lines[i]);
      if (static_cast<Eigen::Index>(fields.size()) != dim)
        throw std::runtime_error(features_path + ":" + std::to_string(i + 1) +
                                 ": expected " + std::to_string(dim) + " values, got " +
                                 std::to_string(fields.size()));
      for (Eigen::Index j = 0; j < dim; ++j)
        g.attributes(static_cast<Eigen::Index>(i), j) =
            parse_real(fields[static_cast<std::size_t>(j)], features_path, i + 1);
    }
  }

  {
    const std::string data = read_file(labels_path);
    const auto lines = split_lines(data);
    if (static_cast<int>(lines.size()) != g.n_nodes)
      throw std::runtime_error(labels_path + ": " + std::to_string(lines.size()) +
                               " label rows for " + std::to_string(g.n_nodes) + " nodes");
    g.labels.resize(static_cast<std::size_t>(g.n_nodes), kUnlabeled);
    g.split.resize(static_cast<std::size_t>(g.n_nodes), Split::none);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto fields = split_fields(lines[i]);
      if (fields.size() != 2)
        throw std::runtime_error(labels_path + ":" + std::to_string(i + 1) +
                                 ": expected 'label split'");
      if (fields[0] != "-") {
        const long l = parse_int(fields[0], labels_path, i + 1);
        if (l < 0)
          throw std::runtime_error(labels_path + ":" + std::to_string(i + 1) +
                                   ": negative label");
        g.labels[i] = static_cast<int>(l);
      }
      g.split[i] = split_from_name(std::string(fields[1]));
    }
  }

  {
    const std::string data = read_file(edges_path);
    const auto lines = split_lines(data);
    std::set<std::pair<int, int>> uniq;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto fields = split_fields(lines[i]);
      if (fields.size() != 2)
        throw std::runtime_error(edges_path + ":" + std::to_string(i + 1) +
                                 ": expected 'src dst'");
      const long u = parse_int(fields[0], edges_path, i + 1);
      const long v = parse_int(fields[1], edges_path, i + 1);
      if (u < 0 || v < 0 || u >= g.n_nodes || v >= g.n_nodes)
        throw std::runtime_error(edges_path + ":" + std::to_string(i + 1) +
                                 ": endpoint out of range (N=" + std::to_string(g.n_nodes) + ")");
      if (u == v) continue;  // self-loop lines are rejected from the edge set
      uniq.emplace(static_cast<int>(std::min(u, v)), static_cast<int>(std::max(u, v)));
    }
    g.edges.assign(uniq.begin(), uniq.end());
  }

  g.validate();
  return g;
}

void save_graph(const AttributedGraph& g, const std::string& features_path,
                const std::string& edges_path, const std::string& labels_path) {
  g.validate();
  {
    std::FILE* f = std::fopen(features_path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + features_path);
    char buf[64];
    for (Eigen::Index i = 0; i < g.attributes.rows(); ++i) {
      for (Eigen::Index j = 0; j < g.attributes.cols(); ++j) {
        const int n = std::snprintf(buf, sizeof buf, j ? " %.17g" : "%.17g", g.attributes(i, j));
        std::fwrite(buf, 1, static_cast<std::size_t>(n), f);
      }
      std::fputc('\n', f);
    }
    std::fclose(f);
  }
  {
    std::FILE* f = std::fopen(edges_path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + edges_path);
    for (const auto& [u, v] : g.edges) std::fprintf(f, "%d %d\n", u, v);
    std::fclose(f);
  }
  {
    std::FILE* f = std::fopen(labels_path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + labels_path);
    for (int i = 0; i < g.n_nodes; ++i) {
      const int l = g.labels[static_cast<std::size_t>(i)];
      if (l == kUnlabeled)
        std::fprintf(f, "- %s\n", split_name(g.split[static_cast<std::size_t>(i)]));
      else
        std::fprintf(f, "%d %s\n", l, split_name(g.split[static_cast<std::size_t>(i)]));
    }
    std::fclose(f);
  }
}

double homophily_ratio(const AttributedGraph& g) {
  long same = 0, counted = 0;
  for (const auto& [u, v] : g.edges) {
    const int lu = g.labels[static_cast<std::size_t>(u)];
    const int lv = g.labels[static_cast<std::size_t>(v)];
    if (lu == kUnlabeled || lv == kUnlabeled) continue;
    ++counted;
    if (lu == lv) ++same;
  }
  if (counted == 0) throw std::runtime_error("homophily_ratio: no edge with both endpoints labeled");
  return static_cast<double>(same) / static_cast<double>(counted);
}

double average_degree(const AttributedGraph& g) {
  if (g.n_nodes == 0) return 0.0;
  return 2.0 * static_cast<double>(g.edges.size()) / static_cast<double>(g.n_nodes);
}

}  // namespace gda
