#include "gda/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace gda {

void AdamState::init(const ParamList& params) {
  m.clear();
  v.clear();
  for (const auto& p : params) {
    m.push_back(Eigen::MatrixXd::Zero(p.value->rows(), p.value->cols()));
    v.push_back(Eigen::MatrixXd::Zero(p.value->rows(), p.value->cols()));
  }
  step = 0;
}

void adam_step(const ParamList& params, const std::vector<Eigen::MatrixXd>& grads,
               AdamState& state, const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: params/grads/state size mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::MatrixXd& p = *params[i].value;
    if (grads[i].rows() != p.rows() || grads[i].cols() != p.cols())
      throw std::invalid_argument("adam_step: gradient shape mismatch for " + params[i].name);
    Eigen::MatrixXd g = grads[i];
    if (cfg.weight_decay != 0.0 && !cfg.decoupled) g += cfg.weight_decay * p;
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    if (cfg.weight_decay != 0.0 && cfg.decoupled) p -= cfg.lr * cfg.weight_decay * p;
    const Eigen::ArrayXXd m_hat = state.m[i].array() / bc1;
    const Eigen::ArrayXXd v_hat = state.v[i].array() / bc2;
    p.array() -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
  }
}

void EmaState::init(const ParamList& params) {
  shadow.clear();
  for (const auto& p : params) shadow.push_back(*p.value);
}

void ema_update(EmaState& ema, const ParamList& params, double decay) {
  if (decay < 0.0 || decay >= 1.0)
    throw std::invalid_argument("ema_update: decay must lie in [0,1)");
  if (ema.shadow.size() != params.size())
    throw std::invalid_argument("ema_update: state size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i)
    ema.shadow[i] = decay * ema.shadow[i] + (1.0 - decay) * (*params[i].value);
}

void write_params(const ParamList& dst, const std::vector<Eigen::MatrixXd>& values) {
  if (dst.size() != values.size())
    throw std::invalid_argument("write_params: size mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (values[i].rows() != dst[i].value->rows() || values[i].cols() != dst[i].value->cols())
      throw std::invalid_argument("write_params: shape mismatch for " + dst[i].name);
    *dst[i].value = values[i];
  }
}

}  // namespace gda
