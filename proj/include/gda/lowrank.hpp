#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace gda {

// Settings for the spectral regularizer and the linear analysis oracle.
struct LowRankConfig {
  double tau = 0.0;    // regularizer weight; 0 disables the term entirely
  double gamma = 0.2;  // rank ratio; threshold r0 = ceil(gamma * min(N, d))
  double eta = 0.01;   // step size for the linear gradient-descent oracle
};

// Spectrum of K = H Hᵀ with a complete orthonormal basis. When d < N the
// eigenproblem is solved on the d×d companion HᵀH and the eigenvectors are
// lifted (u = Hv/√λ); the nullspace columns are completed by QR so that U is
// N×N orthonormal and Parseval holds at full rank.
struct GramSpectrum {
  Eigen::VectorXd eigenvalues;  // length N, descending, nonnegative
  Eigen::MatrixXd u;            // N×N orthonormal columns
  int rank_bound = 0;           // min(N, d): only this many eigenvalues can be nonzero
};

GramSpectrum gram_matrix(const Eigen::MatrixXd& h);

// Trailing spectral mass beyond rank r0: value = Σ_{i>r0} λ̂_i, gradient
// 2·P·H with P the projector onto eigenvectors r0+1.. (subgradient at ties).
struct TnnResult {
  double value = 0.0;
  Eigen::MatrixXd grad;
};

TnnResult truncated_nuclear_norm(const Eigen::MatrixXd& h, int r0);

// Runs t explicit gradient-descent steps on the zero-initialized linear model
// min ‖H_L W − Y_L‖²_F /? (plain squared loss, gradient H_Lᵀ(H_L W − Y_L)) and
// separately evaluates the closed-form labeled residual −(I − ηK_LL)^t·Y_L.
// Returns (iterative residual, closed-form residual), both m×C.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> linear_gd_oracle(const Eigen::MatrixXd& h,
                                                             const Eigen::MatrixXd& y,
                                                             const std::vector<int>& labeled,
                                                             double eta, int t);

// Per class c: p_c = Uᵀ y^(c)/‖y^(c)‖₂; concentration(r) averages ‖p_c(1:r)‖₂
// over classes. concentration(N) = 1 by orthonormality.
struct EigenProjection {
  Eigen::MatrixXd per_class;     // N×C coefficient columns
  Eigen::VectorXd mean_abs;      // per rank, |p| averaged over classes
  Eigen::VectorXd concentration; // length N, nondecreasing, ends at 1
};

EigenProjection eigen_projection(const GramSpectrum& spectrum, const Eigen::MatrixXd& y);

}  // namespace gda
