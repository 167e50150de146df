#pragma once

#include <cmath>

#include <Eigen/Core>

namespace sdelap {

struct NewtonConfig {
  int max_iters = 500;
  /// Max-norm gradient tolerance.
  double grad_tol = 1e-8;
  /// When rounding prevents reaching grad_tol, the mode is also accepted once
  /// half the Newton decrement falls below decrement_tol * (1 + |psi|).
  double decrement_tol = 1e-13;
  /// Initial Levenberg shift (relative to max abs Hessian entry) on a failed
  /// factorization; doubled until PD. Stiff models have a largest entry far
  /// above the curvature that needs shifting.
  double damping_init = 1e-9;
  int max_damping_doublings = 80;
  int max_halvings = 60;
};

struct LaplaceResult {
  Eigen::VectorXd mode;
  double psi_at_mode = 0.0;
  double hessian_logdet = 0.0;
  double correction_logdet = 0.0;
  double log_integral = 0.0;
  Eigen::Index latent_dim = 0;
  int newton_iters = 0;
  bool converged = false;
  double grad_norm = 0.0;
};

/// -psi - 1/2 (log|H| - d log 2 pi) + correction.
inline double laplace_log_integral(double psi, double hessian_logdet, Eigen::Index d, double correction) {
  return -psi - 0.5 * (hessian_logdet - static_cast<double>(d) * std::log(2.0 * M_PI)) + correction;
}

}  // namespace sdelap
