#include "gda/lowrank.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gda {

namespace {

void check_nonempty(const Eigen::MatrixXd& h) {
  if (h.rows() < 1 || h.cols() < 1) {
    throw std::invalid_argument("gram_matrix: matrix must be nonempty");
  }
}

}  // namespace

GramSpectrum gram_matrix(const Eigen::MatrixXd& h) {
  check_nonempty(h);
  const int n = static_cast<int>(h.rows());
  const int d = static_cast<int>(h.cols());

  GramSpectrum out;
  out.rank_bound = std::min(n, d);
  out.eigenvalues = Eigen::VectorXd::Zero(n);
  out.u = Eigen::MatrixXd::Zero(n, n);

  if (n <= d) {
    // The Gram matrix itself is the smaller problem; its solver already
    // returns a complete orthonormal basis.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h * h.transpose());
    if (eig.info() != Eigen::Success) {
      throw std::runtime_error("gram_matrix: eigendecomposition failed");
    }
    for (int i = 0; i < n; ++i) {
      out.eigenvalues(i) = std::max(0.0, eig.eigenvalues()(n - 1 - i));
      out.u.col(i) = eig.eigenvectors().col(n - 1 - i);
    }
    return out;
  }

  // Companion problem HᵀH shares the nonzero spectrum; lift its eigenvectors
  // through H and complete the basis for the nullspace.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h.transpose() * h);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("gram_matrix: eigendecomposition failed");
  }
  const Eigen::VectorXd lam_asc = eig.eigenvalues();
  const double lam_max = std::max(0.0, lam_asc(d - 1));
  const double tol = lam_max * 1e-12;

  int lifted = 0;
  for (int i = 0; i < d; ++i) {
    const double lam = lam_asc(d - 1 - i);
    out.eigenvalues(i) = std::max(0.0, lam);
    if (lam > tol && lam > 0.0) {
      Eigen::VectorXd u = h * eig.eigenvectors().col(d - 1 - i) / std::sqrt(lam);
      u.normalize();
      out.u.col(lifted) = u;
      ++lifted;
    }
  }
  // Eigenvalues past the lifted set are numerically zero; make the stored
  // values consistent with the basis layout (zeros from `lifted` on).
  for (int i = lifted; i < n; ++i) out.eigenvalues(i) = 0.0;

  if (lifted == 0) {
    out.u = Eigen::MatrixXd::Identity(n, n);
    return out;
  }
  if (lifted < n) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(out.u.leftCols(lifted));
    const Eigen::MatrixXd q = qr.householderQ();
    out.u.rightCols(n - lifted) = q.rightCols(n - lifted);
  }
  return out;
}

TnnResult truncated_nuclear_norm(const Eigen::MatrixXd& h, int r0) {
  check_nonempty(h);
  const int n = static_cast<int>(h.rows());
  const int d = static_cast<int>(h.cols());
  const int bound = std::min(n, d);
  if (r0 < 0 || r0 >= bound) {
    throw std::invalid_argument("truncated_nuclear_norm: rank threshold out of range");
  }

  TnnResult res;
  if (d <= n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h.transpose() * h);
    if (eig.info() != Eigen::Success) {
      throw std::runtime_error("truncated_nuclear_norm: eigendecomposition failed");
    }
    // Ascending order: the tail beyond rank r0 is the first d-r0 entries.
    for (int i = 0; i < d - r0; ++i) res.value += std::max(0.0, eig.eigenvalues()(i));
    if (r0 == 0) {
      res.grad = 2.0 * h;
    } else {
      const Eigen::MatrixXd v_top = eig.eigenvectors().rightCols(r0);
      res.grad = 2.0 * (h - (h * v_top) * v_top.transpose());
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h * h.transpose());
    if (eig.info() != Eigen::Success) {
      throw std::runtime_error("truncated_nuclear_norm: eigendecomposition failed");
    }
    for (int i = 0; i < n - r0; ++i) res.value += std::max(0.0, eig.eigenvalues()(i));
    if (r0 == 0) {
      res.grad = 2.0 * h;
    } else {
      const Eigen::MatrixXd u_top = eig.eigenvectors().rightCols(r0);
      res.grad = 2.0 * (h - u_top * (u_top.transpose() * h));
    }
  }
  return res;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> linear_gd_oracle(const Eigen::MatrixXd& h,
                                                             const Eigen::MatrixXd& y,
                                                             const std::vector<int>& labeled,
                                                             double eta, int t) {
  check_nonempty(h);
  if (y.rows() != h.rows()) {
    throw std::invalid_argument("linear_gd_oracle: feature and target row counts differ");
  }
  if (labeled.empty()) {
    throw std::invalid_argument("linear_gd_oracle: labeled index set is empty");
  }
  if (t < 0) throw std::invalid_argument("linear_gd_oracle: step count must be nonnegative");
  const int m = static_cast<int>(labeled.size());
  Eigen::MatrixXd h_l(m, h.cols());
  Eigen::MatrixXd y_l(m, y.cols());
  for (int i = 0; i < m; ++i) {
    const int idx = labeled[static_cast<std::size_t>(i)];
    if (idx < 0 || idx >= h.rows()) {
      throw std::invalid_argument("linear_gd_oracle: labeled index out of range");
    }
    h_l.row(i) = h.row(idx);
    y_l.row(i) = y.row(idx);
  }

  const Eigen::MatrixXd k_ll = h_l * h_l.transpose();
  // Contraction requires every (1 − ηλ) to stay inside (0, 1].
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k_ll);
  const double lam_max = std::max(0.0, eig.eigenvalues()(m - 1));
  if (!(eta > 0.0) || (lam_max > 0.0 && eta >= 1.0 / lam_max)) {
    throw std::invalid_argument(
        "linear_gd_oracle: step size must satisfy 0 < eta < 1/lambda_max");
  }

  // Path 1: explicit gradient descent in weight space from W = 0.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(h.cols(), y.cols());
  for (int step = 0; step < t; ++step) {
    const Eigen::MatrixXd grad = h_l.transpose() * (h_l * w - y_l);
    w -= eta * grad;
  }
  Eigen::MatrixXd residual_iter = h_l * w - y_l;

  // Path 2: closed form −(I − ηK_LL)^t Y_L evaluated by repeated products.
  Eigen::MatrixXd residual_closed = -y_l;
  for (int step = 0; step < t; ++step) {
    const Eigen::MatrixXd damped = k_ll * residual_closed;
    residual_closed -= eta * damped;
  }
  return {std::move(residual_iter), std::move(residual_closed)};
}

EigenProjection eigen_projection(const GramSpectrum& spectrum, const Eigen::MatrixXd& y) {
  const int n = static_cast<int>(spectrum.u.rows());
  if (y.rows() != n) {
    throw std::invalid_argument("eigen_projection: indicator row count mismatch");
  }
  const int c = static_cast<int>(y.cols());
  if (c < 1) throw std::invalid_argument("eigen_projection: no classes");

  EigenProjection out;
  out.per_class = Eigen::MatrixXd(n, c);
  for (int j = 0; j < c; ++j) {
    const double norm = y.col(j).norm();
    if (!(norm > 0.0)) {
      throw std::invalid_argument("eigen_projection: class indicator has zero mass");
    }
    out.per_class.col(j) = spectrum.u.transpose() * (y.col(j) / norm);
  }
  out.mean_abs = out.per_class.cwiseAbs().rowwise().mean();
  out.concentration = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd cum = Eigen::VectorXd::Zero(c);
  for (int i = 0; i < n; ++i) {
    cum += out.per_class.row(i).transpose().cwiseAbs2();
    double mean_norm = 0.0;
    for (int j = 0; j < c; ++j) mean_norm += std::sqrt(std::max(0.0, cum(j)));
    out.concentration(i) = mean_norm / static_cast<double>(c);
  }
  return out;
}

}  // namespace gda
