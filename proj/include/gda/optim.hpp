#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gda/checkpoint.hpp"

namespace gda {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  bool decoupled = false;  // false: L2 added to the gradient; true: AdamW
};

struct AdamState {
  std::vector<Eigen::MatrixXd> m;
  std::vector<Eigen::MatrixXd> v;
  long step = 0;

  void init(const ParamList& params);
};

// One bias-corrected Adam update; grads aligned with params.
void adam_step(const ParamList& params, const std::vector<Eigen::MatrixXd>& grads,
               AdamState& state, const AdamConfig& cfg);

struct EmaState {
  std::vector<Eigen::MatrixXd> shadow;

  void init(const ParamList& params);  // shadow starts at the current params
};

// shadow ← decay·shadow + (1−decay)·params, elementwise. decay ∈ [0,1).
void ema_update(EmaState& ema, const ParamList& params, double decay);

// Copies the shadow values into the destination parameters (e.g. an
// inference-time copy of a model).
void write_params(const ParamList& dst, const std::vector<Eigen::MatrixXd>& values);

}  // namespace gda
