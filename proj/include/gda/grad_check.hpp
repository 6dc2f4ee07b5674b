#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "gda/checkpoint.hpp"

namespace gda {

// Central finite differences against analytic gradients.
//
// `loss` re-evaluates the scalar objective at the current parameter values;
// `params` are perturbed in place entry by entry (and restored). `analytic`
// is aligned with `params`. Returns the maximum relative error
// |a − n| / max(|a|, |n|, floor).
double grad_check(const std::function<double()>& loss, const ParamList& params,
                  const std::vector<Eigen::MatrixXd>& analytic, double eps = 1e-6,
                  double floor = 1e-3);

}  // namespace gda
