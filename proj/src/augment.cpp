#include "gda/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gda {

std::pair<Eigen::MatrixXd, std::vector<int>> generate_synthetic_latents(
    const Denoiser& den, int n_per_class, double omega, const DiffusionSchedule& sched,
    std::uint64_t seed) {
  if (n_per_class < 0) throw std::invalid_argument("generate_synthetic_latents: negative count");
  const int c_cls = den.n_classes();
  const int n_total = c_cls * n_per_class;
  const int dlat = den.latent_dim();
  Eigen::MatrixXd z(n_total, dlat);
  std::vector<int> labels(static_cast<std::size_t>(n_total));
  const Rng base(seed);

  int s = 0;
  for (int c = 0; c < c_cls; ++c) {
    // one stream per global sample index; all samples of a class share the
    // denoiser evaluations, so the reverse chain is batched per class
    std::vector<Rng> streams;
    streams.reserve(static_cast<std::size_t>(n_per_class));
    for (int j = 0; j < n_per_class; ++j)
      streams.push_back(base.fork(static_cast<std::uint64_t>(s + j)));
    if (n_per_class > 0) {
      Eigen::MatrixXd zb(dlat, n_per_class);
      for (int j = 0; j < n_per_class; ++j) zb.col(j) = streams[static_cast<std::size_t>(j)].normal_vector(dlat);
      const std::vector<std::optional<int>> cond(static_cast<std::size_t>(n_per_class), c);
      const std::vector<std::optional<int>> uncond(static_cast<std::size_t>(n_per_class),
                                                   std::nullopt);
      for (int t = sched.t_max; t >= 1; --t) {
        const Eigen::MatrixXd eps_c = denoise_eps_batch(den, zb, t, cond);
        const Eigen::MatrixXd eps_u = denoise_eps_batch(den, zb, t, uncond);
        const Eigen::MatrixXd eps_tilde = (1.0 + omega) * eps_c - omega * eps_u;
        zb = (zb - sched.betas[t - 1] / std::sqrt(1.0 - sched.alpha_bars[t - 1]) * eps_tilde) /
             std::sqrt(sched.alphas[t - 1]);
        if (t > 1)
          for (int j = 0; j < n_per_class; ++j)
            zb.col(j) += sched.sigmas[t - 1] *
                         streams[static_cast<std::size_t>(j)].normal_vector(dlat);
      }
      for (int j = 0; j < n_per_class; ++j) {
        z.row(s + j) = zb.col(j).transpose();
        labels[static_cast<std::size_t>(s + j)] = c;
      }
    }
    s += n_per_class;
  }
  return {std::move(z), std::move(labels)};
}

std::pair<Eigen::MatrixXd, std::vector<std::vector<int>>> decode_synthetic_structures(
    const GaeDecoder& dec, const Eigen::MatrixXd& latents, const ClusterAssignment& clusters,
    const DecodeOptions& opts) {
  const auto n = latents.rows();
  const int k_total = dec.n_clusters();
  if (k_total != clusters.k)
    throw std::invalid_argument("decode_synthetic_structures: cluster count mismatch");

  Eigen::MatrixXd attrs(n, dec.attr_dim());
  std::vector<std::vector<int>> edges(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd z = latents.row(i).transpose();
    attrs.row(i) = decode_node_attributes(dec, z).transpose();
    const Eigen::VectorXd inter = decode_inter_cluster(dec, z);

    // (global node id, score) for every admissible slot we look at
    std::vector<std::pair<int, double>> picked;
    double best_score = -1.0;
    int best_node = -1;
    for (int k = 0; k < k_total; ++k) {
      const bool selected = inter[k] > opts.threshold;
      // the fallback needs scores from every cluster, so decode all rows
      const Eigen::VectorXd intra = decode_intra_cluster(dec, z, k);
      const auto& members = clusters.members[static_cast<std::size_t>(k)];
      for (std::size_t m = 0; m < members.size(); ++m) {
        const double score = inter[k] * intra[static_cast<Eigen::Index>(m)];
        if (score > best_score) {
          best_score = score;
          best_node = members[m];
        }
        if (selected && intra[static_cast<Eigen::Index>(m)] > opts.threshold)
          picked.emplace_back(members[m], score);
      }
    }
    if (picked.empty() && best_node >= 0) picked.emplace_back(best_node, best_score);
    if (opts.max_degree > 0 && static_cast<int>(picked.size()) > opts.max_degree) {
      std::sort(picked.begin(), picked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
      });
      picked.resize(static_cast<std::size_t>(opts.max_degree));
    }
    auto& out = edges[static_cast<std::size_t>(i)];
    for (const auto& [node, score] : picked) out.push_back(node);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return {std::move(attrs), std::move(edges)};
}

SyntheticBatch make_synthetic_batch(const GaeDecoder& dec, const Eigen::MatrixXd& latents,
                                    const std::vector<int>& labels,
                                    const ClusterAssignment& clusters, const DecodeOptions& opts) {
  if (static_cast<std::size_t>(latents.rows()) != labels.size())
    throw std::invalid_argument("make_synthetic_batch: labels/latents size mismatch");
  SyntheticBatch batch;
  batch.latents = latents;
  batch.labels = labels;
  auto [attrs, edges] = decode_synthetic_structures(dec, latents, clusters, opts);
  batch.attributes = std::move(attrs);
  batch.edges_to_base = std::move(edges);
  return batch;
}

AugmentedGraph assemble_augmented_graph(const AttributedGraph& base, const SyntheticBatch& syn) {
  const int n_syn = syn.size();
  if (n_syn > 0 && syn.attributes.cols() != base.attributes.cols())
    throw std::invalid_argument("assemble_augmented_graph: attribute dimension mismatch");
  if (static_cast<int>(syn.edges_to_base.size()) != n_syn)
    throw std::invalid_argument("assemble_augmented_graph: edge list count mismatch");

  AugmentedGraph out;
  out.n_base = base.n_nodes;
  out.n_syn = n_syn;
  AttributedGraph& g = out.graph;
  g.n_nodes = base.n_nodes + n_syn;
  g.attributes.resize(g.n_nodes, base.attributes.cols());
  g.attributes.topRows(base.n_nodes) = base.attributes;
  if (n_syn > 0) g.attributes.bottomRows(n_syn) = syn.attributes;
  g.labels = base.labels;
  g.split = base.split;
  g.labels.resize(static_cast<std::size_t>(g.n_nodes));
  g.split.resize(static_cast<std::size_t>(g.n_nodes));
  for (int s = 0; s < n_syn; ++s) {
    g.labels[static_cast<std::size_t>(base.n_nodes + s)] = syn.labels[static_cast<std::size_t>(s)];
    g.split[static_cast<std::size_t>(base.n_nodes + s)] = Split::train;
  }
  g.edges = base.edges;
  for (int s = 0; s < n_syn; ++s)
    for (const int j : syn.edges_to_base[static_cast<std::size_t>(s)]) {
      if (j < 0 || j >= base.n_nodes)
        throw std::invalid_argument("assemble_augmented_graph: edge endpoint outside base graph");
      g.edges.emplace_back(j, base.n_nodes + s);
    }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  g.validate();
  return out;
}

StructureQuality synthetic_quality(const AttributedGraph& base, const SyntheticBatch& syn) {
  StructureQuality q;
  if (syn.size() == 0) return q;
  long total_edges = 0;
  long labeled_edges = 0;
  long matching = 0;
  for (int s = 0; s < syn.size(); ++s)
    for (const int j : syn.edges_to_base[static_cast<std::size_t>(s)]) {
      ++total_edges;
      if (base.labels[static_cast<std::size_t>(j)] == kUnlabeled) continue;
      ++labeled_edges;
      if (base.labels[static_cast<std::size_t>(j)] == syn.labels[static_cast<std::size_t>(s)])
        ++matching;
    }
  if (labeled_edges == 0)
    throw std::runtime_error("synthetic_quality: no synthetic edge has a labeled base endpoint");
  q.homophily = static_cast<double>(matching) / static_cast<double>(labeled_edges);
  q.avg_degree = static_cast<double>(total_edges) / static_cast<double>(syn.size());
  return q;
}

}  // namespace gda
