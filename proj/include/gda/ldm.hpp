#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "gda/checkpoint.hpp"
#include "gda/nn.hpp"
#include "gda/rng.hpp"

namespace gda {

// β_t rises linearly from beta_start to beta_end over t = 1..t_max; entries
// for step t live at index t−1. ᾱ_t = Π α_s must fall below 1e-3 at t_max so
// the terminal marginal is indistinguishable from pure noise.
struct DiffusionSchedule {
  int t_max = 0;
  Eigen::VectorXd betas;
  Eigen::VectorXd alphas;      // 1 − β_t
  Eigen::VectorXd alpha_bars;  // running product of α
  Eigen::VectorXd sigmas;      // ρ_t = sqrt(β_t), ancestral noise scale

  double terminal_alpha_bar() const { return alpha_bars[t_max - 1]; }
};

DiffusionSchedule make_schedule(int t_max, double beta_start, double beta_end);

// Closed-form forward marginal: z_t = sqrt(ᾱ_t)·z0 + sqrt(1−ᾱ_t)·eps.
Eigen::VectorXd q_sample(const Eigen::VectorXd& z0, int t, const Eigen::VectorXd& eps,
                         const DiffusionSchedule& sched);

struct LdmConfig {
  int latent = 64;
  int hidden = 512;
  int time_dim = 64;
  int label_dim = 64;
  int t_max = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  int epochs = 3000;
  int batch = 128;
  double lr = 2e-4;
  double weight_decay = 1e-4;  // decoupled (AdamW)
  double ema_decay = 0.995;
  double p_uncond = 0.1;  // label-dropout rate for guidance-free conditioning
  std::uint64_t seed = 0;
};

// Noise predictor ε_θ(z_t, t, label): a three-layer MLP over the concatenation
// [z_t ∥ label embedding ∥ sinusoidal time embedding]; the label table's last
// row is the unconditional null token.
struct Denoiser {
  std::vector<DenseLayer> mlp;
  Eigen::MatrixXd label_table;  // (C+1) × label_dim
  int time_dim = 0;

  int latent_dim() const { return mlp.empty() ? 0 : mlp.back().out_dim(); }
  int label_dim() const { return static_cast<int>(label_table.cols()); }
  int n_classes() const { return static_cast<int>(label_table.rows()) - 1; }
  ParamList params();
};

Denoiser make_denoiser(int latent, int hidden, int n_classes, int label_dim, int time_dim,
                       Rng& rng);

// Batched prediction over columns; a nullopt label selects the null token.
Eigen::MatrixXd denoise_eps_batch(const Denoiser& den, const Eigen::MatrixXd& z_t, int t,
                                  const std::vector<std::optional<int>>& labels);
Eigen::VectorXd denoise_eps(const Denoiser& den, const Eigen::VectorXd& z_t, int t,
                            std::optional<int> label);

// Mean over samples of ‖eps − ε_θ(z_t, t, label)‖²; per sample the rng is
// consumed as: step t ~ U{1..T}, eps ~ N(0,I), label-dropout coin.
double ldm_loss(Denoiser& den, const Eigen::MatrixXd& z0_rows, const std::vector<int>& labels,
                const DiffusionSchedule& sched, double p_uncond, Rng& rng);

// Same objective plus analytic gradients aligned with den.params(). Pass rng
// copies when finite-differencing so the drawn (t, eps, coin) repeat.
double ldm_loss_and_grads(Denoiser& den, const Eigen::MatrixXd& z0_rows,
                          const std::vector<int>& labels, const DiffusionSchedule& sched,
                          double p_uncond, Rng& rng, std::vector<Eigen::MatrixXd>& grads);

struct LdmTrainResult {
  Denoiser den;
  Denoiser den_ema;
  std::vector<double> epoch_losses;
};

// AdamW training over labeled-node latents (rows of z0, aligned labels).
LdmTrainResult train_ldm(const Eigen::MatrixXd& z0_rows, const std::vector<int>& labels,
                         const LdmConfig& cfg);

// Ancestral sampling with classifier-free guidance
// ε̃ = (1+ω)·ε_θ(z_t, t, label) − ω·ε_θ(z_t, t, null); no noise at t = 1.
Eigen::VectorXd cfg_sample(const Denoiser& den, int label, double omega,
                           const DiffusionSchedule& sched, Rng& rng);

}  // namespace gda
