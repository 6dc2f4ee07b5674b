#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gda/checkpoint.hpp"
#include "gda/clustering.hpp"
#include "gda/graph.hpp"
#include "gda/neighbor_maps.hpp"
#include "gda/nn.hpp"
#include "gda/rng.hpp"

namespace gda {

struct GaeConfig {
  int hidden = 256;        // h: attention/MLP width
  int latent = 64;         // D′: latent width
  int batch = 128;         // nodes per step
  int neg_clusters = 5;    // sampled zero-target clusters per node in the intra loss
  int phase1_epochs = 1000;  // attribute-reconstruction-only warmup
  int phase2_epochs = 1000;  // full objective
  double lr = 1e-3;
  double weight_decay = 1e-5;  // coupled L2 (Adam)
  double ema_decay = 0.995;
  std::uint64_t seed = 0;
};

// Encoder: per-node latent from position-tagged attributes aggregated over the
// node's 1-hop star by two attention layers, fused with an MLP view of the raw
// attributes: Z_i = f′(Z′_i ∥ f(X_i)).
struct GaeEncoder {
  std::vector<DenseLayer> f;        // D → h, relu
  AttentionLayer attn1;             // D → h
  AttentionLayer attn2;             // h → h
  std::vector<DenseLayer> f_prime;  // 2h → D′, identity

  int attr_dim() const { return f.empty() ? 0 : f.front().in_dim(); }
  int latent_dim() const { return f_prime.empty() ? 0 : f_prime.back().out_dim(); }
  ParamList params();
};

// Decoder: attributes via a three-layer MLP; edges via the two-level
// neighborhood maps — cluster membership row (inter) then per-cluster member
// slots (intra), the latter conditioned on a learned cluster embedding g(k).
struct GaeDecoder {
  std::vector<DenseLayer> attr_mlps;  // D′ → h → h → D; relu, relu, identity
  std::vector<DenseLayer> inter_mlp;  // D′ → K, sigmoid
  Eigen::MatrixXd cluster_table;      // (K+1) × D′ embedding rows (last row unused null slot)
  std::vector<DenseLayer> g;          // D′ → D′, relu (cluster-embedding transform)
  std::vector<DenseLayer> intra_mlp;  // 2·D′ → capacity, sigmoid (shared across clusters)

  int latent_dim() const { return attr_mlps.empty() ? 0 : attr_mlps.front().in_dim(); }
  int attr_dim() const { return attr_mlps.empty() ? 0 : attr_mlps.back().out_dim(); }
  int n_clusters() const { return inter_mlp.empty() ? 0 : inter_mlp.back().out_dim(); }
  int capacity() const { return intra_mlp.empty() ? 0 : intra_mlp.back().out_dim(); }
  ParamList params();
};

struct LatentTable {
  Eigen::MatrixXd z;  // N × D′
};

GaeEncoder make_gae_encoder(int attr_dim, int hidden, int latent, Rng& rng);
GaeDecoder make_gae_decoder(int attr_dim, int hidden, int latent, int n_clusters, int capacity,
                            Rng& rng);

// Positional tag added to attributes; sinusoidal of the largest even dim ≤ D,
// zero-padded by one entry when D is odd.
Eigen::VectorXd position_tag(int node, int attr_dim);

Eigen::VectorXd encode_node(const GaeEncoder& enc, const AttributedGraph& g, int node);
LatentTable encode_all(const GaeEncoder& enc, const AttributedGraph& g);

Eigen::VectorXd decode_node_attributes(const GaeDecoder& dec, const Eigen::VectorXd& z);
Eigen::VectorXd decode_inter_cluster(const GaeDecoder& dec, const Eigen::VectorXd& z);
Eigen::VectorXd decode_intra_cluster(const GaeDecoder& dec, const Eigen::VectorXd& z, int cluster);

// Mean over the batch of ‖X_i−X̂_i‖² + ‖C_i−Ĉ_i‖² + Σ_k ‖M_ik−M̂_ik‖², where
// the intra sum covers the clusters node i actually touches plus
// `neg_clusters` sampled untouched ones, and member slots beyond a cluster's
// size are masked out. `structure=false` keeps only the attribute term
// (training phase 1). The same rng drives negative-cluster sampling.
double gae_loss(const std::vector<int>& batch, GaeEncoder& enc, GaeDecoder& dec,
                const AttributedGraph& g, const NeighborMaps& nm, const ClusterAssignment& clusters,
                int neg_clusters, bool structure, Rng& rng);

// Same objective plus analytic gradients, aligned with
// enc.params() followed by dec.params() (zeros for parameters the chosen
// objective does not reach). Callers doing finite-difference checks should
// pass copies of one fixed rng so the sampled negative clusters repeat.
double gae_loss_and_grads(const std::vector<int>& batch, GaeEncoder& enc, GaeDecoder& dec,
                          const AttributedGraph& g, const NeighborMaps& nm,
                          const ClusterAssignment& clusters, int neg_clusters, bool structure,
                          Rng& rng, std::vector<Eigen::MatrixXd>& grads);

struct GaeTrainResult {
  GaeEncoder enc;
  GaeDecoder dec;
  GaeEncoder enc_ema;
  GaeDecoder dec_ema;
  std::vector<double> epoch_losses;  // phase 1 then phase 2, mean step loss per epoch
};

// Two-phase training: phase 1 optimizes only the attribute term (and only the
// parameters it reaches); phase 2 optimizes the full objective over all
// parameters. EMA (decay cfg.ema_decay) is tracked across both phases.
GaeTrainResult train_gae(const AttributedGraph& g, const ClusterAssignment& clusters,
                         const GaeConfig& cfg);

}  // namespace gda
