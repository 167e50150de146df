#pragma once

#include <vector>

#include <Eigen/Core>

namespace sdelap::oracles {

/// Discrete linear-Gaussian chain on nodes 0..M:
///   x_0 ~ N(m0, P0),  x_i = F_i x_{i-1} + c_i + N(0, Q_i),  y_i = H x_i + N(0, R).
/// Entries with index 0 in F, c, Q are unused. y[i] is empty when node i is
/// unobserved; NaN components are treated as missing.
struct LinearChain {
  Eigen::VectorXd m0;
  Eigen::MatrixXd P0;
  std::vector<Eigen::MatrixXd> F;
  std::vector<Eigen::VectorXd> c;
  std::vector<Eigen::MatrixXd> Q;
  Eigen::MatrixXd H;
  Eigen::MatrixXd R;
  std::vector<Eigen::VectorXd> y;
};

struct KalmanResult {
  double loglik = 0.0;
  std::vector<Eigen::VectorXd> filtered_mean;
  std::vector<Eigen::VectorXd> smoothed_mean;
  std::vector<Eigen::MatrixXd> smoothed_cov;
  std::vector<Eigen::VectorXd> smoothed_sd;
};

/// Kalman filter log-likelihood with Rauch-Tung-Striebel smoothing.
KalmanResult kalman_loglik_and_smooth(const LinearChain& chain);

/// Chain of an Ornstein-Uhlenbeck model discretized on `times`.
enum class OuScheme { Exact, EulerMaruyama, Trapezoidal };
LinearChain ou_chain(double lambda, double mu, double sigma, const std::vector<double>& times, OuScheme scheme);

/// Log-likelihood from the full joint Gaussian of all observations (dense; for
/// cross-checking the filter on small problems).
double dense_gaussian_loglik(const LinearChain& chain);

}  // namespace sdelap::oracles
