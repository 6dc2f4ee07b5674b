#include "gda/gae.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gda/optim.hpp"

namespace gda {
namespace {

// ---------- batched star-subgraph bookkeeping ----------

// One encoder step touches, per batch node i, the 1-hop star {i} ∪ N(i).
// All stars of a batch share one projection GEMM over the union of their
// members, so the per-pair attention work stays cheap.
struct StarBatch {
  std::vector<int> batch;                // center ids, batch order
  std::vector<int> uniq;                 // ascending union of star members
  std::vector<std::vector<int>> stars;   // per center: member ids ascending
  std::vector<int> center_pos;           // center's position within its star
  std::vector<int> offset;               // star's first column in the h-block
  int total = 0;                         // Σ star sizes
};

int uniq_col(const std::vector<int>& uniq, int id) {
  return static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), id) - uniq.begin());
}

StarBatch build_star_batch(const std::vector<std::vector<int>>& adj, const std::vector<int>& batch) {
  StarBatch sb;
  sb.batch = batch;
  for (const int i : batch) {
    std::vector<int> star = adj[static_cast<std::size_t>(i)];  // ascending, no self
    star.insert(std::lower_bound(star.begin(), star.end(), i), i);
    sb.uniq.insert(sb.uniq.end(), star.begin(), star.end());
    sb.stars.push_back(std::move(star));
  }
  std::sort(sb.uniq.begin(), sb.uniq.end());
  sb.uniq.erase(std::unique(sb.uniq.begin(), sb.uniq.end()), sb.uniq.end());
  sb.offset.reserve(sb.stars.size());
  for (const auto& star : sb.stars) {
    sb.offset.push_back(sb.total);
    sb.total += static_cast<int>(star.size());
  }
  sb.center_pos.reserve(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s)
    sb.center_pos.push_back(static_cast<int>(
        std::lower_bound(sb.stars[s].begin(), sb.stars[s].end(), batch[s]) - sb.stars[s].begin()));
  return sb;
}

// Attribute columns for the requested ids, optionally with position tags
// added from a precomputed D×N tag table (trig per node is paid once per run).
Eigen::MatrixXd gather_cols(const AttributedGraph& g, const Eigen::MatrixXd* tags,
                            const std::vector<int>& ids) {
  const int d = g.dim();
  Eigen::MatrixXd out(d, static_cast<Eigen::Index>(ids.size()));
  for (std::size_t j = 0; j < ids.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = g.attributes.row(ids[j]).transpose();
    if (tags) out.col(static_cast<Eigen::Index>(j)) += tags->col(ids[j]);
  }
  return out;
}

Eigen::MatrixXd position_tag_table(int n_nodes, int attr_dim) {
  Eigen::MatrixXd tags(attr_dim, n_nodes);
  for (int i = 0; i < n_nodes; ++i) tags.col(i) = position_tag(i, attr_dim);
  return tags;
}

struct EncCaches {
  Eigen::MatrixXd proj1;                     // h × |uniq|
  std::vector<std::vector<AttnCache>> l1;    // per star, per member
  Eigen::MatrixXd h_all;                     // h × total
  Eigen::MatrixXd proj2;                     // h × total
  std::vector<AttnCache> l2;                 // per star
  MlpCache f_cache, fp_cache;
};

// Forward pass for a batch of stars. posx_u must hold the columns for sb.uniq;
// x_centers holds raw attribute columns for sb.batch (the f branch input).
Eigen::MatrixXd encode_batch(const GaeEncoder& enc, const Eigen::MatrixXd& posx_u,
                             const Eigen::MatrixXd& x_centers, const StarBatch& sb,
                             EncCaches& ec) {
  const int h = enc.attn1.out_dim();
  const auto n_stars = static_cast<Eigen::Index>(sb.stars.size());
  ec.proj1.noalias() = enc.attn1.w * posx_u;
  ec.l1.assign(sb.stars.size(), {});
  ec.h_all.resize(h, sb.total);

  for (std::size_t s = 0; s < sb.stars.size(); ++s) {
    const auto& star = sb.stars[s];
    std::vector<int> star_cols(star.size());
    for (std::size_t m = 0; m < star.size(); ++m) star_cols[m] = uniq_col(sb.uniq, star[m]);
    const int center_col = star_cols[static_cast<std::size_t>(sb.center_pos[s])];
    ec.l1[s].resize(star.size());
    for (std::size_t m = 0; m < star.size(); ++m) {
      // within the star, a leaf's neighborhood is {leaf, center}; the center
      // sees the whole star — both lists kept ascending by node id
      std::vector<int> nbrs;
      if (static_cast<int>(m) == sb.center_pos[s]) {
        nbrs = star_cols;
      } else if (star_cols[m] < center_col) {
        nbrs = {star_cols[m], center_col};
      } else {
        nbrs = {center_col, star_cols[m]};
      }
      ec.h_all.col(sb.offset[s] + static_cast<Eigen::Index>(m)) =
          attention_forward_proj(enc.attn1, ec.proj1, star_cols[m], nbrs, &ec.l1[s][m]);
    }
  }

  ec.proj2.noalias() = enc.attn2.w * ec.h_all;
  ec.l2.assign(sb.stars.size(), {});
  Eigen::MatrixXd zprime(h, n_stars);
  for (std::size_t s = 0; s < sb.stars.size(); ++s) {
    std::vector<int> block(sb.stars[s].size());
    for (std::size_t m = 0; m < block.size(); ++m)
      block[m] = sb.offset[s] + static_cast<int>(m);
    zprime.col(static_cast<Eigen::Index>(s)) = attention_forward_proj(
        enc.attn2, ec.proj2, sb.offset[s] + sb.center_pos[s], block, &ec.l2[s]);
  }

  const Eigen::MatrixXd fx = mlp_forward(enc.f, x_centers, &ec.f_cache);
  Eigen::MatrixXd fused(2 * h, n_stars);
  fused.topRows(h) = zprime;
  fused.bottomRows(h) = fx;
  return mlp_forward(enc.f_prime, fused, &ec.fp_cache);
}

struct EncGrads {
  std::vector<DenseGrad> f, f_prime;
  AttentionGrad a1, a2;
};

EncGrads zero_enc_grads(const GaeEncoder& enc) {
  EncGrads g;
  g.f = zero_grads(enc.f);
  g.f_prime = zero_grads(enc.f_prime);
  g.a1 = {Eigen::MatrixXd::Zero(enc.attn1.w.rows(), enc.attn1.w.cols()),
          Eigen::MatrixXd::Zero(enc.attn1.attn.rows(), 1)};
  g.a2 = {Eigen::MatrixXd::Zero(enc.attn2.w.rows(), enc.attn2.w.cols()),
          Eigen::MatrixXd::Zero(enc.attn2.attn.rows(), 1)};
  return g;
}

void encode_backward(const GaeEncoder& enc, const Eigen::MatrixXd& posx_u, const StarBatch& sb,
                     const EncCaches& ec, const Eigen::MatrixXd& d_z, EncGrads& grads) {
  const int h = enc.attn1.out_dim();
  const Eigen::MatrixXd d_fused = mlp_backward(enc.f_prime, ec.fp_cache, d_z, grads.f_prime);
  const Eigen::MatrixXd d_zprime = d_fused.topRows(h);
  mlp_backward(enc.f, ec.f_cache, d_fused.bottomRows(h), grads.f);

  Eigen::MatrixXd d_proj2 = Eigen::MatrixXd::Zero(h, sb.total);
  for (std::size_t s = 0; s < sb.stars.size(); ++s)
    attention_backward_proj(enc.attn2, ec.proj2, ec.l2[s],
                            d_zprime.col(static_cast<Eigen::Index>(s)), d_proj2, grads.a2.attn);
  grads.a2.w.noalias() += d_proj2 * ec.h_all.transpose();
  const Eigen::MatrixXd d_h_all = enc.attn2.w.transpose() * d_proj2;

  Eigen::MatrixXd d_proj1 = Eigen::MatrixXd::Zero(h, posx_u.cols());
  for (std::size_t s = 0; s < sb.stars.size(); ++s)
    for (std::size_t m = 0; m < ec.l1[s].size(); ++m)
      attention_backward_proj(enc.attn1, ec.proj1, ec.l1[s][m],
                              d_h_all.col(sb.offset[s] + static_cast<Eigen::Index>(m)), d_proj1,
                              grads.a1.attn);
  grads.a1.w.noalias() += d_proj1 * posx_u.transpose();
}

// ---------- decoder batched heads ----------

struct IntraPair {
  int batch_pos;  // column in z
  int cluster;
  bool positive;
};

std::vector<int> sample_negative_clusters(const std::vector<int>& touched_ascending, int k_total,
                                          int want, Rng& rng) {
  std::vector<int> untouched;
  untouched.reserve(static_cast<std::size_t>(k_total));
  std::size_t t = 0;
  for (int k = 0; k < k_total; ++k) {
    if (t < touched_ascending.size() && touched_ascending[t] == k) {
      ++t;
      continue;
    }
    untouched.push_back(k);
  }
  const int take = std::min<int>(want, static_cast<int>(untouched.size()));
  for (int j = 0; j < take; ++j) {
    const auto pick =
        static_cast<std::size_t>(rng.uniform_int(j, static_cast<std::int64_t>(untouched.size()) - 1));
    std::swap(untouched[static_cast<std::size_t>(j)], untouched[pick]);
  }
  untouched.resize(static_cast<std::size_t>(take));
  return untouched;
}

struct DecGrads {
  std::vector<DenseGrad> attr, inter, g, intra;
  Eigen::MatrixXd table;
};

DecGrads zero_dec_grads(const GaeDecoder& dec) {
  DecGrads gr;
  gr.attr = zero_grads(dec.attr_mlps);
  gr.inter = zero_grads(dec.inter_mlp);
  gr.g = zero_grads(dec.g);
  gr.intra = zero_grads(dec.intra_mlp);
  gr.table = Eigen::MatrixXd::Zero(dec.cluster_table.rows(), dec.cluster_table.cols());
  return gr;
}

std::vector<Eigen::MatrixXd> flatten_grads(const EncGrads& e, const DecGrads* d,
                                           bool attr_only_decoder) {
  std::vector<Eigen::MatrixXd> out;
  for (const auto& gr : e.f) {
    out.push_back(gr.w);
    out.push_back(gr.b);
  }
  out.push_back(e.a1.w);
  out.push_back(e.a1.attn);
  out.push_back(e.a2.w);
  out.push_back(e.a2.attn);
  for (const auto& gr : e.f_prime) {
    out.push_back(gr.w);
    out.push_back(gr.b);
  }
  if (d) {
    for (const auto& gr : d->attr) {
      out.push_back(gr.w);
      out.push_back(gr.b);
    }
    if (!attr_only_decoder) {
      for (const auto& gr : d->inter) {
        out.push_back(gr.w);
        out.push_back(gr.b);
      }
      out.push_back(d->table);
      for (const auto& gr : d->g) {
        out.push_back(gr.w);
        out.push_back(gr.b);
      }
      for (const auto& gr : d->intra) {
        out.push_back(gr.w);
        out.push_back(gr.b);
      }
    }
  }
  return out;
}

void append_mlp_params(ParamList& out, const std::string& prefix, std::vector<DenseLayer>& layers) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    out.push_back({prefix + "." + std::to_string(l) + ".w", &layers[l].w});
    out.push_back({prefix + "." + std::to_string(l) + ".b", &layers[l].b});
  }
}

// Shared forward (+ optional backward) over one batch.
double gae_step(const std::vector<int>& batch, GaeEncoder& enc, GaeDecoder& dec,
                const AttributedGraph& g, const std::vector<std::vector<int>>& adj,
                const Eigen::MatrixXd& tags, const NeighborMaps& nm,
                const ClusterAssignment& clusters, int neg_clusters, bool structure, Rng& rng,
                EncGrads* egr, DecGrads* dgr) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const StarBatch sb = build_star_batch(adj, batch);
  const Eigen::MatrixXd posx_u = gather_cols(g, &tags, sb.uniq);
  const Eigen::MatrixXd x_centers = gather_cols(g, nullptr, batch);

  EncCaches ec;
  const Eigen::MatrixXd z = encode_batch(enc, posx_u, x_centers, sb, ec);

  double loss = 0.0;
  Eigen::MatrixXd d_z = Eigen::MatrixXd::Zero(z.rows(), z.cols());

  // attributes
  MlpCache attr_cache;
  const Eigen::MatrixXd xhat = mlp_forward(dec.attr_mlps, z, &attr_cache);
  const Eigen::MatrixXd attr_resid = xhat - x_centers;
  loss += attr_resid.squaredNorm() * inv_b;
  if (egr) d_z += mlp_backward(dec.attr_mlps, attr_cache, 2.0 * inv_b * attr_resid, dgr->attr);

  if (structure) {
    // inter-cluster rows
    MlpCache inter_cache;
    const Eigen::MatrixXd chat = mlp_forward(dec.inter_mlp, z, &inter_cache);
    Eigen::MatrixXd c_target(chat.rows(), b);
    for (Eigen::Index s = 0; s < b; ++s)
      c_target.col(s) = nm.inter_row(batch[static_cast<std::size_t>(s)]);
    const Eigen::MatrixXd inter_resid = chat - c_target;
    loss += inter_resid.squaredNorm() * inv_b;
    if (egr) d_z += mlp_backward(dec.inter_mlp, inter_cache, 2.0 * inv_b * inter_resid, dgr->inter);

    // intra rows: touched clusters plus sampled untouched ones
    std::vector<IntraPair> pairs;
    for (Eigen::Index s = 0; s < b; ++s) {
      const int i = batch[static_cast<std::size_t>(s)];
      std::vector<int> touched;
      for (const auto& row : nm.rows[static_cast<std::size_t>(i)]) touched.push_back(row.cluster);
      for (const int k : touched) pairs.push_back({static_cast<int>(s), k, true});
      for (const int k : sample_negative_clusters(touched, nm.n_clusters, neg_clusters, rng))
        pairs.push_back({static_cast<int>(s), k, false});
    }
    if (!pairs.empty()) {
      const auto p = static_cast<Eigen::Index>(pairs.size());
      const int dlat = dec.latent_dim();
      Eigen::MatrixXd emb_in(dlat, p);
      for (Eigen::Index j = 0; j < p; ++j)
        emb_in.col(j) = dec.cluster_table.row(pairs[static_cast<std::size_t>(j)].cluster).transpose();
      MlpCache g_cache;
      const Eigen::MatrixXd ge = mlp_forward(dec.g, emb_in, &g_cache);
      Eigen::MatrixXd pair_in(2 * dlat, p);
      for (Eigen::Index j = 0; j < p; ++j)
        pair_in.col(j).head(dlat) = z.col(pairs[static_cast<std::size_t>(j)].batch_pos);
      pair_in.bottomRows(dlat) = ge;
      MlpCache intra_cache;
      const Eigen::MatrixXd mhat = mlp_forward(dec.intra_mlp, pair_in, &intra_cache);
      Eigen::MatrixXd m_resid(mhat.rows(), p);
      for (Eigen::Index j = 0; j < p; ++j) {
        const auto& pr = pairs[static_cast<std::size_t>(j)];
        const int i = batch[static_cast<std::size_t>(pr.batch_pos)];
        Eigen::VectorXd target = pr.positive ? nm.intra_row(i, pr.cluster)
                                             : Eigen::VectorXd::Zero(mhat.rows());
        Eigen::VectorXd resid = mhat.col(j) - target;
        // slots beyond the cluster's actual size carry no supervision
        const int size_k = clusters.cluster_size(pr.cluster);
        for (Eigen::Index slot = size_k; slot < resid.size(); ++slot) resid[slot] = 0.0;
        m_resid.col(j) = resid;
      }
      loss += m_resid.squaredNorm() * inv_b;
      if (egr) {
        const Eigen::MatrixXd d_pair =
            mlp_backward(dec.intra_mlp, intra_cache, 2.0 * inv_b * m_resid, dgr->intra);
        for (Eigen::Index j = 0; j < p; ++j)
          d_z.col(pairs[static_cast<std::size_t>(j)].batch_pos) += d_pair.col(j).head(dlat);
        const Eigen::MatrixXd d_emb =
            mlp_backward(dec.g, g_cache, d_pair.bottomRows(dlat), dgr->g);
        for (Eigen::Index j = 0; j < p; ++j)
          dgr->table.row(pairs[static_cast<std::size_t>(j)].cluster) += d_emb.col(j).transpose();
      }
    }
  }

  if (egr) encode_backward(enc, posx_u, sb, ec, d_z, *egr);
  return loss;
}

}  // namespace

Eigen::VectorXd position_tag(int node, int attr_dim) {
  if (attr_dim % 2 == 0) return positional_embedding(node, attr_dim);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(attr_dim);
  out.head(attr_dim - 1) = positional_embedding(node, attr_dim - 1);
  return out;
}

ParamList GaeEncoder::params() {
  ParamList out;
  append_mlp_params(out, "enc.f", f);
  out.push_back({"enc.attn1.w", &attn1.w});
  out.push_back({"enc.attn1.a", &attn1.attn});
  out.push_back({"enc.attn2.w", &attn2.w});
  out.push_back({"enc.attn2.a", &attn2.attn});
  append_mlp_params(out, "enc.fp", f_prime);
  return out;
}

ParamList GaeDecoder::params() {
  ParamList out;
  append_mlp_params(out, "dec.attr", attr_mlps);
  append_mlp_params(out, "dec.inter", inter_mlp);
  out.push_back({"dec.table", &cluster_table});
  append_mlp_params(out, "dec.g", g);
  append_mlp_params(out, "dec.intra", intra_mlp);
  return out;
}

GaeEncoder make_gae_encoder(int attr_dim, int hidden, int latent, Rng& rng) {
  GaeEncoder enc;
  enc.f.push_back(make_dense(hidden, attr_dim, Act::relu, rng));
  enc.attn1 = make_attention(hidden, attr_dim, rng);
  enc.attn2 = make_attention(hidden, hidden, rng);
  enc.f_prime.push_back(make_dense(latent, 2 * hidden, Act::identity, rng));
  return enc;
}

GaeDecoder make_gae_decoder(int attr_dim, int hidden, int latent, int n_clusters, int capacity,
                            Rng& rng) {
  GaeDecoder dec;
  dec.attr_mlps.push_back(make_dense(hidden, latent, Act::relu, rng));
  dec.attr_mlps.push_back(make_dense(hidden, hidden, Act::relu, rng));
  dec.attr_mlps.push_back(make_dense(attr_dim, hidden, Act::identity, rng));
  dec.inter_mlp.push_back(make_dense(n_clusters, latent, Act::sigmoid, rng));
  dec.cluster_table = make_embedding_table(n_clusters + 1, latent, rng);
  dec.g.push_back(make_dense(latent, latent, Act::relu, rng));
  dec.intra_mlp.push_back(make_dense(capacity, 2 * latent, Act::sigmoid, rng));
  return dec;
}

Eigen::VectorXd encode_node(const GaeEncoder& enc, const AttributedGraph& g, int node) {
  if (node < 0 || node >= g.n_nodes) throw std::out_of_range("encode_node: node id out of range");
  const auto adj = g.adjacency();
  const StarBatch sb = build_star_batch(adj, {node});
  const int d = g.dim();
  Eigen::MatrixXd posx_u(d, static_cast<Eigen::Index>(sb.uniq.size()));
  for (std::size_t j = 0; j < sb.uniq.size(); ++j)
    posx_u.col(static_cast<Eigen::Index>(j)) =
        g.attributes.row(sb.uniq[j]).transpose() + position_tag(sb.uniq[j], d);
  const Eigen::MatrixXd x_center = gather_cols(g, nullptr, {node});
  EncCaches ec;
  return encode_batch(enc, posx_u, x_center, sb, ec);
}

LatentTable encode_all(const GaeEncoder& enc, const AttributedGraph& g) {
  const auto adj = g.adjacency();
  const Eigen::MatrixXd tags = position_tag_table(g.n_nodes, g.dim());
  LatentTable table;
  table.z.resize(g.n_nodes, enc.latent_dim());
  constexpr int kChunk = 256;
  for (int start = 0; start < g.n_nodes; start += kChunk) {
    const int stop = std::min(g.n_nodes, start + kChunk);
    std::vector<int> batch;
    for (int i = start; i < stop; ++i) batch.push_back(i);
    const StarBatch sb = build_star_batch(adj, batch);
    const Eigen::MatrixXd posx_u = gather_cols(g, &tags, sb.uniq);
    const Eigen::MatrixXd x_centers = gather_cols(g, nullptr, batch);
    EncCaches ec;
    const Eigen::MatrixXd z = encode_batch(enc, posx_u, x_centers, sb, ec);
    for (int i = start; i < stop; ++i) table.z.row(i) = z.col(i - start).transpose();
  }
  return table;
}

Eigen::VectorXd decode_node_attributes(const GaeDecoder& dec, const Eigen::VectorXd& z) {
  return mlp_apply(dec.attr_mlps, z);
}

Eigen::VectorXd decode_inter_cluster(const GaeDecoder& dec, const Eigen::VectorXd& z) {
  return mlp_apply(dec.inter_mlp, z);
}

Eigen::VectorXd decode_intra_cluster(const GaeDecoder& dec, const Eigen::VectorXd& z, int cluster) {
  if (cluster < 0 || cluster >= dec.n_clusters())
    throw std::out_of_range("decode_intra_cluster: cluster id out of range");
  const Eigen::VectorXd emb = dec.cluster_table.row(cluster).transpose();
  const Eigen::VectorXd ge = mlp_apply(dec.g, emb);
  Eigen::VectorXd pair(z.size() + ge.size());
  pair << z, ge;
  return mlp_apply(dec.intra_mlp, pair);
}

double gae_loss(const std::vector<int>& batch, GaeEncoder& enc, GaeDecoder& dec,
                const AttributedGraph& g, const NeighborMaps& nm, const ClusterAssignment& clusters,
                int neg_clusters, bool structure, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("gae_loss: empty batch");
  const auto adj = g.adjacency();
  const Eigen::MatrixXd tags = position_tag_table(g.n_nodes, g.dim());
  return gae_step(batch, enc, dec, g, adj, tags, nm, clusters, neg_clusters, structure, rng,
                  nullptr, nullptr);
}

double gae_loss_and_grads(const std::vector<int>& batch, GaeEncoder& enc, GaeDecoder& dec,
                          const AttributedGraph& g, const NeighborMaps& nm,
                          const ClusterAssignment& clusters, int neg_clusters, bool structure,
                          Rng& rng, std::vector<Eigen::MatrixXd>& grads) {
  if (batch.empty()) throw std::invalid_argument("gae_loss_and_grads: empty batch");
  const auto adj = g.adjacency();
  const Eigen::MatrixXd tags = position_tag_table(g.n_nodes, g.dim());
  EncGrads egr = zero_enc_grads(enc);
  DecGrads dgr = zero_dec_grads(dec);
  const double loss = gae_step(batch, enc, dec, g, adj, tags, nm, clusters, neg_clusters,
                               structure, rng, &egr, &dgr);
  grads = flatten_grads(egr, &dgr, false);
  return loss;
}

GaeTrainResult train_gae(const AttributedGraph& g, const ClusterAssignment& clusters,
                         const GaeConfig& cfg) {
  const Rng root(cfg.seed);
  Rng init_rng = root.fork(0);
  Rng train_rng = root.fork(1);

  GaeTrainResult res;
  res.enc = make_gae_encoder(g.dim(), cfg.hidden, cfg.latent, init_rng);
  res.dec = make_gae_decoder(g.dim(), cfg.hidden, cfg.latent, clusters.k, clusters.capacity,
                             init_rng);

  const NeighborMaps nm = build_neighbor_maps(g, clusters);
  const auto adj = g.adjacency();
  const Eigen::MatrixXd tags = position_tag_table(g.n_nodes, g.dim());

  ParamList enc_params = res.enc.params();
  ParamList dec_params = res.dec.params();
  ParamList all_params = enc_params;
  all_params.insert(all_params.end(), dec_params.begin(), dec_params.end());
  // phase-1 group: encoder plus the attribute decoder head only
  ParamList phase1_params = enc_params;
  for (const auto& p : dec_params)
    if (p.name.rfind("dec.attr", 0) == 0) phase1_params.push_back(p);

  EmaState ema;
  ema.init(all_params);
  const AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay, false};

  std::vector<int> order(static_cast<std::size_t>(g.n_nodes));
  for (int i = 0; i < g.n_nodes; ++i) order[static_cast<std::size_t>(i)] = i;

  const auto run_phase = [&](int epochs, bool structure, const ParamList& group) {
    AdamState state;
    state.init(group);
    for (int epoch = 0; epoch < epochs; ++epoch) {
      train_rng.shuffle(order);
      double epoch_loss = 0.0;
      int steps = 0;
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
        const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
        const std::vector<int> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(stop));
        EncGrads egr = zero_enc_grads(res.enc);
        DecGrads dgr = zero_dec_grads(res.dec);
        const double loss = gae_step(batch, res.enc, res.dec, g, adj, tags, nm, clusters,
                                     cfg.neg_clusters, structure, train_rng, &egr, &dgr);
        if (!std::isfinite(loss))
          throw std::runtime_error("train_gae: non-finite loss at epoch " + std::to_string(epoch));
        adam_step(group, flatten_grads(egr, &dgr, !structure), state, adam);
        ema_update(ema, all_params, cfg.ema_decay);
        epoch_loss += loss;
        ++steps;
      }
      res.epoch_losses.push_back(steps > 0 ? epoch_loss / steps : 0.0);
    }
  };

  run_phase(cfg.phase1_epochs, false, phase1_params);
  run_phase(cfg.phase2_epochs, true, all_params);

  res.enc_ema = res.enc;
  res.dec_ema = res.dec;
  ParamList ema_params = res.enc_ema.params();
  ParamList dec_ema_params = res.dec_ema.params();
  ema_params.insert(ema_params.end(), dec_ema_params.begin(), dec_ema_params.end());
  write_params(ema_params, ema.shadow);
  return res;
}

}  // namespace gda
