#include "gda/ldm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gda/optim.hpp"

namespace gda {
namespace {

struct DrawnStep {
  int t;
  std::optional<int> label;
};

Eigen::MatrixXd build_denoiser_input(const Denoiser& den, const Eigen::MatrixXd& z_t,
                                     const std::vector<DrawnStep>& steps) {
  const auto b = z_t.cols();
  const int dlat = static_cast<int>(z_t.rows());
  const int dlab = den.label_dim();
  Eigen::MatrixXd input(dlat + dlab + den.time_dim, b);
  input.topRows(dlat) = z_t;
  for (Eigen::Index s = 0; s < b; ++s) {
    const auto& st = steps[static_cast<std::size_t>(s)];
    input.col(s).segment(dlat, dlab) = label_embedding(den.label_table, st.label);
    input.col(s).tail(den.time_dim) = positional_embedding(st.t, den.time_dim);
  }
  return input;
}

std::vector<Eigen::MatrixXd> flatten_denoiser_grads(const std::vector<DenseGrad>& mlp,
                                                    const Eigen::MatrixXd& table) {
  std::vector<Eigen::MatrixXd> out;
  for (const auto& g : mlp) {
    out.push_back(g.w);
    out.push_back(g.b);
  }
  out.push_back(table);
  return out;
}

double ldm_step(Denoiser& den, const Eigen::MatrixXd& z0_rows, const std::vector<int>& labels,
                const DiffusionSchedule& sched, double p_uncond, Rng& rng,
                std::vector<Eigen::MatrixXd>* grads) {
  if (z0_rows.rows() == 0) throw std::invalid_argument("ldm loss: empty batch");
  if (static_cast<std::size_t>(z0_rows.rows()) != labels.size())
    throw std::invalid_argument("ldm loss: labels/latents size mismatch");
  if (p_uncond < 0.0 || p_uncond >= 1.0)
    throw std::invalid_argument("ldm loss: p_uncond must lie in [0,1)");
  const auto b = z0_rows.rows();
  const int dlat = static_cast<int>(z0_rows.cols());
  const double inv_b = 1.0 / static_cast<double>(b);

  // per sample, in batch order: step, noise, label-dropout coin
  std::vector<DrawnStep> steps(static_cast<std::size_t>(b));
  Eigen::MatrixXd eps(dlat, b);
  Eigen::MatrixXd z_t(dlat, b);
  for (Eigen::Index s = 0; s < b; ++s) {
    const int label = labels[static_cast<std::size_t>(s)];
    if (label < 0 || label >= den.n_classes())
      throw std::invalid_argument("ldm loss: label out of range");
    const int t = static_cast<int>(rng.uniform_int(1, sched.t_max));
    eps.col(s) = rng.normal_vector(dlat);
    const bool drop = rng.uniform() < p_uncond;
    steps[static_cast<std::size_t>(s)] = {t, drop ? std::nullopt : std::optional<int>(label)};
    z_t.col(s) = std::sqrt(sched.alpha_bars[t - 1]) * z0_rows.row(s).transpose() +
                 std::sqrt(1.0 - sched.alpha_bars[t - 1]) * eps.col(s);
  }

  const Eigen::MatrixXd input = build_denoiser_input(den, z_t, steps);
  MlpCache cache;
  const Eigen::MatrixXd out = mlp_forward(den.mlp, input, &cache);
  const Eigen::MatrixXd resid = out - eps;
  const double loss = resid.squaredNorm() * inv_b;

  if (grads) {
    std::vector<DenseGrad> mlp_grads = zero_grads(den.mlp);
    Eigen::MatrixXd table_grad =
        Eigen::MatrixXd::Zero(den.label_table.rows(), den.label_table.cols());
    const Eigen::MatrixXd d_input =
        mlp_backward(den.mlp, cache, 2.0 * inv_b * resid, mlp_grads);
    const int dlab = den.label_dim();
    for (Eigen::Index s = 0; s < b; ++s) {
      const auto& st = steps[static_cast<std::size_t>(s)];
      const auto row = st.label ? *st.label : den.n_classes();
      table_grad.row(row) += d_input.col(s).segment(dlat, dlab).transpose();
    }
    *grads = flatten_denoiser_grads(mlp_grads, table_grad);
  }
  return loss;
}

}  // namespace

DiffusionSchedule make_schedule(int t_max, double beta_start, double beta_end) {
  if (t_max < 1) throw std::invalid_argument("make_schedule: t_max must be at least 1");
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
    throw std::invalid_argument("make_schedule: need 0 < beta_start <= beta_end < 1");
  DiffusionSchedule s;
  s.t_max = t_max;
  s.betas.resize(t_max);
  for (int t = 1; t <= t_max; ++t)
    s.betas[t - 1] = t_max == 1 ? beta_start
                                : beta_start + (beta_end - beta_start) *
                                                   static_cast<double>(t - 1) /
                                                   static_cast<double>(t_max - 1);
  s.alphas = Eigen::VectorXd::Ones(t_max) - s.betas;
  s.alpha_bars.resize(t_max);
  double prod = 1.0;
  for (int t = 0; t < t_max; ++t) {
    prod *= s.alphas[t];
    s.alpha_bars[t] = prod;
  }
  s.sigmas = s.betas.cwiseSqrt();
  return s;
}

Eigen::VectorXd q_sample(const Eigen::VectorXd& z0, int t, const Eigen::VectorXd& eps,
                         const DiffusionSchedule& sched) {
  if (t < 1 || t > sched.t_max) throw std::out_of_range("q_sample: step out of range");
  if (z0.size() != eps.size()) throw std::invalid_argument("q_sample: noise dimension mismatch");
  return std::sqrt(sched.alpha_bars[t - 1]) * z0 + std::sqrt(1.0 - sched.alpha_bars[t - 1]) * eps;
}

ParamList Denoiser::params() {
  ParamList out;
  for (std::size_t l = 0; l < mlp.size(); ++l) {
    out.push_back({"den.mlp." + std::to_string(l) + ".w", &mlp[l].w});
    out.push_back({"den.mlp." + std::to_string(l) + ".b", &mlp[l].b});
  }
  out.push_back({"den.table", &label_table});
  return out;
}

Denoiser make_denoiser(int latent, int hidden, int n_classes, int label_dim, int time_dim,
                       Rng& rng) {
  Denoiser den;
  const int in_dim = latent + label_dim + time_dim;
  den.mlp.push_back(make_dense(hidden, in_dim, Act::relu, rng));
  den.mlp.push_back(make_dense(hidden, hidden, Act::relu, rng));
  den.mlp.push_back(make_dense(latent, hidden, Act::identity, rng));
  den.label_table = make_embedding_table(n_classes + 1, label_dim, rng);
  den.time_dim = time_dim;
  return den;
}

Eigen::MatrixXd denoise_eps_batch(const Denoiser& den, const Eigen::MatrixXd& z_t, int t,
                                  const std::vector<std::optional<int>>& labels) {
  if (static_cast<std::size_t>(z_t.cols()) != labels.size())
    throw std::invalid_argument("denoise_eps_batch: labels/batch size mismatch");
  std::vector<DrawnStep> steps(labels.size());
  for (std::size_t s = 0; s < labels.size(); ++s) steps[s] = {t, labels[s]};
  return mlp_forward(den.mlp, build_denoiser_input(den, z_t, steps));
}

Eigen::VectorXd denoise_eps(const Denoiser& den, const Eigen::VectorXd& z_t, int t,
                            std::optional<int> label) {
  return denoise_eps_batch(den, z_t, t, {label});
}

double ldm_loss(Denoiser& den, const Eigen::MatrixXd& z0_rows, const std::vector<int>& labels,
                const DiffusionSchedule& sched, double p_uncond, Rng& rng) {
  return ldm_step(den, z0_rows, labels, sched, p_uncond, rng, nullptr);
}

double ldm_loss_and_grads(Denoiser& den, const Eigen::MatrixXd& z0_rows,
                          const std::vector<int>& labels, const DiffusionSchedule& sched,
                          double p_uncond, Rng& rng, std::vector<Eigen::MatrixXd>& grads) {
  return ldm_step(den, z0_rows, labels, sched, p_uncond, rng, &grads);
}

LdmTrainResult train_ldm(const Eigen::MatrixXd& z0_rows, const std::vector<int>& labels,
                         const LdmConfig& cfg) {
  if (z0_rows.rows() == 0) throw std::invalid_argument("train_ldm: no latents");
  if (static_cast<std::size_t>(z0_rows.rows()) != labels.size())
    throw std::invalid_argument("train_ldm: labels/latents size mismatch");
  int n_classes = 0;
  for (const int y : labels) {
    if (y < 0) throw std::invalid_argument("train_ldm: negative label");
    n_classes = std::max(n_classes, y + 1);
  }

  const Rng root(cfg.seed);
  Rng init_rng = root.fork(0);
  Rng train_rng = root.fork(1);

  LdmTrainResult res;
  res.den = make_denoiser(static_cast<int>(z0_rows.cols()), cfg.hidden, n_classes, cfg.label_dim,
                          cfg.time_dim, init_rng);
  const DiffusionSchedule sched = make_schedule(cfg.t_max, cfg.beta_start, cfg.beta_end);

  ParamList params = res.den.params();
  AdamState state;
  state.init(params);
  EmaState ema;
  ema.init(params);
  const AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay, true};

  std::vector<int> order(static_cast<std::size_t>(z0_rows.rows()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    train_rng.shuffle(order);
    double epoch_loss = 0.0;
    int steps = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      Eigen::MatrixXd z_batch(static_cast<Eigen::Index>(stop - start), z0_rows.cols());
      std::vector<int> y_batch(stop - start);
      for (std::size_t j = start; j < stop; ++j) {
        z_batch.row(static_cast<Eigen::Index>(j - start)) = z0_rows.row(order[j]);
        y_batch[j - start] = labels[static_cast<std::size_t>(order[j])];
      }
      std::vector<Eigen::MatrixXd> grads;
      const double loss =
          ldm_step(res.den, z_batch, y_batch, sched, cfg.p_uncond, train_rng, &grads);
      if (!std::isfinite(loss))
        throw std::runtime_error("train_ldm: non-finite loss at epoch " + std::to_string(epoch));
      adam_step(params, grads, state, adam);
      ema_update(ema, params, cfg.ema_decay);
      epoch_loss += loss;
      ++steps;
    }
    res.epoch_losses.push_back(steps > 0 ? epoch_loss / steps : 0.0);
  }

  res.den_ema = res.den;
  write_params(res.den_ema.params(), ema.shadow);
  return res;
}

Eigen::VectorXd cfg_sample(const Denoiser& den, int label, double omega,
                           const DiffusionSchedule& sched, Rng& rng) {
  if (omega < 0.0) throw std::invalid_argument("cfg_sample: omega must be nonnegative");
  if (label < 0 || label >= den.n_classes())
    throw std::out_of_range("cfg_sample: label out of range");
  const int dlat = den.latent_dim();
  Eigen::VectorXd z = rng.normal_vector(dlat);
  for (int t = sched.t_max; t >= 1; --t) {
    const Eigen::VectorXd eps_c = denoise_eps(den, z, t, label);
    const Eigen::VectorXd eps_u = denoise_eps(den, z, t, std::nullopt);
    const Eigen::VectorXd eps_tilde = (1.0 + omega) * eps_c - omega * eps_u;
    z = (z - sched.betas[t - 1] / std::sqrt(1.0 - sched.alpha_bars[t - 1]) * eps_tilde) /
        std::sqrt(sched.alphas[t - 1]);
    if (t > 1) z += sched.sigmas[t - 1] * rng.normal_vector(dlat);
  }
  return z;
}

}  // namespace gda
