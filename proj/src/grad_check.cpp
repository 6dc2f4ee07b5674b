#include "gda/grad_check.hpp"

#include <cmath>
#include <stdexcept>

namespace gda {

double grad_check(const std::function<double()>& loss, const ParamList& params,
                  const std::vector<Eigen::MatrixXd>& analytic, double eps, double floor) {
  if (params.size() != analytic.size())
    throw std::invalid_argument("grad_check: params/analytic size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::MatrixXd& p = *params[i].value;
    if (analytic[i].rows() != p.rows() || analytic[i].cols() != p.cols())
      throw std::invalid_argument("grad_check: analytic shape mismatch for " + params[i].name);
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      for (Eigen::Index r = 0; r < p.rows(); ++r) {
        const double saved = p(r, c);
        p(r, c) = saved + eps;
        const double up = loss();
        p(r, c) = saved - eps;
        const double down = loss();
        p(r, c) = saved;
        const double numeric = (up - down) / (2.0 * eps);
        const double a = analytic[i](r, c);
        const double rel =
            std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
        if (rel > worst) worst = rel;
      }
    }
  }
  return worst;
}

}  // namespace gda
