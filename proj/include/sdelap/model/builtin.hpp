#pragma once

#include <cmath>
#include <string_view>

#include "sdelap/model/sde_model.hpp"

namespace sdelap::models {

/// Shifted Ornstein-Uhlenbeck: dX = lambda (mu - X) dt + sigma dB.
struct Ou {
  static constexpr int dim = 1;
  static constexpr std::string_view id = "ou";

  double lambda = 1.0;
  double mu = 0.0;
  double sigma = 1.0;

  template <typename T>
  Vec<T, 1> drift(const Vec<T, 1>& x) const {
    Vec<T, 1> out;
    out[0] = lambda * (mu - x[0]);
    return out;
  }
  template <typename T>
  Mat<T, 1> diffusion(const Vec<T, 1>&) const {
    Mat<T, 1> out;
    out(0, 0) = T(sigma);
    return out;
  }
  /// Exact Gaussian transition density.
  template <typename T>
  T exact_transition_logpdf(const Vec<T, 1>& x, const Vec<T, 1>& y, double dt) const {
    using std::exp;
    using std::log;
    const double decay = std::exp(-lambda * dt);
    const double var = sigma * sigma * (1.0 - decay * decay) / (2.0 * lambda);
    const T r = y[0] - (mu + (x[0] - mu) * decay);
    return -0.5 * r * r / var - 0.5 * std::log(2.0 * M_PI * var);
  }
};

/// Geometric Brownian motion: dX = r X dt + sigma X dB.
struct Gbm {
  static constexpr int dim = 1;
  static constexpr std::string_view id = "gbm";

  double r = 1.0;
  double sigma = 1.0;

  template <typename T>
  Vec<T, 1> drift(const Vec<T, 1>& x) const {
    Vec<T, 1> out;
    out[0] = r * x[0];
    return out;
  }
  template <typename T>
  Mat<T, 1> diffusion(const Vec<T, 1>& x) const {
    Mat<T, 1> out;
    out(0, 0) = sigma * x[0];
    return out;
  }
  bool in_domain(const Vec<double, 1>& x) const { return x[0] > 0.0; }
  /// Exact log-normal transition density.
  template <typename T>
  T exact_transition_logpdf(const Vec<T, 1>& x, const Vec<T, 1>& y, double dt) const {
    using std::log;
    using ad::log;
    const double var = sigma * sigma * dt;
    const T ly = log(y[0]);
    const T z = ly - log(x[0]) - (r - 0.5 * sigma * sigma) * dt;
    return -0.5 * z * z / var - 0.5 * std::log(2.0 * M_PI * var) - ly;
  }
};

/// Cox-Ingersoll-Ross: dX = lambda (xi - X) dt + gamma sqrt(X) dB.
struct Cir {
  static constexpr int dim = 1;
  static constexpr std::string_view id = "cir";

  double lambda = 1.0;
  double xi = 1.0;
  double gamma = 0.5;

  template <typename T>
  Vec<T, 1> drift(const Vec<T, 1>& x) const {
    Vec<T, 1> out;
    out[0] = lambda * (xi - x[0]);
    return out;
  }
  template <typename T>
  Mat<T, 1> diffusion(const Vec<T, 1>& x) const {
    using std::sqrt;
    using ad::sqrt;
    Mat<T, 1> out;
    out(0, 0) = gamma * sqrt(x[0]);
    return out;
  }
  bool in_domain(const Vec<double, 1>& x) const { return x[0] > 0.0; }
};

/// Stochastic Rosenzweig-MacArthur predator-prey model, state (N, P):
///   dN = [r N (1 - N/K) - c N P / (N + nbar)] dt + sigma_n N dB1
///   dP = [efficiency c N P / (N + nbar) - mu P] dt + sigma_p P dB2
/// c is the maximal uptake per predator and nbar the half-saturation
/// abundance (Holling type II response).
struct Rma {
  static constexpr int dim = 2;
  static constexpr std::string_view id = "rma";

  double r = 1.0;
  double K = 1.0;
  double efficiency = 3.0;
  double c = 1.0;
  double nbar = 1.0 / 3.0;
  double mu = 1.0;
  double sigma_n = 0.2;
  double sigma_p = 0.1;

  template <typename T>
  Vec<T, 2> drift(const Vec<T, 2>& x) const {
    const T uptake = c * x[0] * x[1] / (x[0] + nbar);
    Vec<T, 2> out;
    out[0] = r * x[0] * (1.0 - x[0] / K) - uptake;
    out[1] = efficiency * uptake - mu * x[1];
    return out;
  }
  template <typename T>
  Mat<T, 2> diffusion(const Vec<T, 2>& x) const {
    Mat<T, 2> out;
    out(0, 0) = sigma_n * x[0];
    out(0, 1) = T(0.0);
    out(1, 0) = T(0.0);
    out(1, 1) = sigma_p * x[1];
    return out;
  }
  bool in_domain(const Vec<double, 2>& x) const { return x[0] > 0.0 && x[1] > 0.0; }
};

}  // namespace sdelap::models
