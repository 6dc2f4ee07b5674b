#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "gda/rng.hpp"

namespace gda {

enum class Act { identity, relu, leaky_relu, elu, sigmoid };

inline constexpr double kLeakySlope = 0.2;

// Elementwise activation and its derivative, both taken at the pre-activation.
Eigen::MatrixXd activate(Act act, const Eigen::MatrixXd& pre);
Eigen::MatrixXd activate_grad(Act act, const Eigen::MatrixXd& pre);

// ---- Dense layers (columns are samples) ----

struct DenseLayer {
  Eigen::MatrixXd w;  // out×in
  Eigen::MatrixXd b;  // out×1
  Act act = Act::identity;

  int out_dim() const { return static_cast<int>(w.rows()); }
  int in_dim() const { return static_cast<int>(w.cols()); }
};

struct DenseGrad {
  Eigen::MatrixXd w;
  Eigen::MatrixXd b;
};

// Glorot-uniform weights, zero bias.
DenseLayer make_dense(int out, int in, Act act, Rng& rng);

struct MlpCache {
  std::vector<Eigen::MatrixXd> inputs;  // layer inputs
  std::vector<Eigen::MatrixXd> pres;    // pre-activations
};

std::vector<DenseGrad> zero_grads(const std::vector<DenseLayer>& layers);

// y = act_L(W_L · … act_1(W_1 x + b_1) … + b_L), batched over columns.
Eigen::MatrixXd mlp_forward(const std::vector<DenseLayer>& layers, const Eigen::MatrixXd& x,
                            MlpCache* cache = nullptr);

// Backpropagates d_y through the cached forward; accumulates parameter
// gradients into `grads` and returns the gradient at the input.
Eigen::MatrixXd mlp_backward(const std::vector<DenseLayer>& layers, const MlpCache& cache,
                             const Eigen::MatrixXd& d_y, std::vector<DenseGrad>& grads);

// Single-vector convenience wrapper.
Eigen::VectorXd mlp_apply(const std::vector<DenseLayer>& layers, const Eigen::VectorXd& x);

// ---- Attention aggregation (single-head, GAT-style scoring) ----

struct AttentionLayer {
  Eigen::MatrixXd w;     // out×in
  Eigen::MatrixXd attn;  // 2·out × 1 scoring vector

  int out_dim() const { return static_cast<int>(w.rows()); }
  int in_dim() const { return static_cast<int>(w.cols()); }
};

struct AttentionGrad {
  Eigen::MatrixXd w;
  Eigen::MatrixXd attn;
};

AttentionLayer make_attention(int out, int in, Rng& rng);

// One aggregation over columns of a shared projection proj = W · inputs.
// Splitting projection from aggregation lets a caller batch the projection
// GEMM across many aggregations that reuse the same columns.
struct AttnCache {
  int center = 0;
  std::vector<int> nbrs;
  Eigen::VectorXd s_pre;    // scores before leaky_relu
  Eigen::VectorXd alpha;    // softmax weights
  Eigen::VectorXd agg_pre;  // Σ_j α_j proj_j, before elu
};

// scores e_j = leaky_relu(attn · [proj_center ∥ proj_j]); α = softmax(e);
// output = elu(Σ_j α_j proj_j). `nbrs` must be nonempty.
Eigen::VectorXd attention_forward_proj(const AttentionLayer& layer, const Eigen::MatrixXd& proj,
                                       int center, const std::vector<int>& nbrs,
                                       AttnCache* cache = nullptr);

// Accumulates gradients into d_proj (same shape as proj) and grad.attn.
// The caller finishes with grad.w += d_proj · inputsᵀ and, if needed,
// d_inputs = Wᵀ · d_proj.
void attention_backward_proj(const AttentionLayer& layer, const Eigen::MatrixXd& proj,
                             const AttnCache& cache, const Eigen::VectorXd& d_out,
                             Eigen::MatrixXd& d_proj, Eigen::MatrixXd& d_attn);

// Self-contained variant: neighbors is the full aggregation list (callers
// include the center in it when the neighborhood contains the node itself).
Eigen::VectorXd attention_aggregate(const AttentionLayer& layer, const Eigen::VectorXd& center,
                                    const std::vector<Eigen::VectorXd>& neighbors);

// ---- Embeddings and small utilities ----

Eigen::VectorXd softmax(const Eigen::VectorXd& x);

// Sinusoidal position code: out[2i] = sin(p / 10000^(2i/dim)), out[2i+1] = cos(same).
Eigen::VectorXd positional_embedding(int index, int dim);

// Row lookup; the null token owns the last row.
Eigen::VectorXd label_embedding(const Eigen::MatrixXd& table, std::optional<int> label);

// N(0, 0.02) entries.
Eigen::MatrixXd make_embedding_table(int rows, int dim, Rng& rng);

}  // namespace gda
