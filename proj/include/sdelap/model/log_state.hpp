#pragma once

#include <cmath>

#include "sdelap/model/sde_model.hpp"

namespace sdelap::models {

/// The model of base M expressed in log-coordinates u = log x (componentwise),
/// transformed by Ito's lemma:
///   f~_j(u) = f_j(x)/x_j - (g g^T)_jj / (2 x_j^2),   g~_jk(u) = g_jk(x)/x_j.
/// Requires a positive state space.
template <SdeModel M>
struct LogState {
  static constexpr int dim = M::dim;

  M base;

  template <typename T>
  Vec<T, dim> drift(const Vec<T, dim>& u) const {
    const Vec<T, dim> x = natural(u);
    const Vec<T, dim> f = base.drift(x);
    const Mat<T, dim> g = base.diffusion(x);
    Vec<T, dim> out;
    for (int j = 0; j < dim; ++j) {
      T gg = g(j, 0) * g(j, 0);
      for (int k = 1; k < dim; ++k) gg = gg + g(j, k) * g(j, k);
      out[j] = f[j] / x[j] - 0.5 * gg / (x[j] * x[j]);
    }
    return out;
  }

  template <typename T>
  Mat<T, dim> diffusion(const Vec<T, dim>& u) const {
    const Vec<T, dim> x = natural(u);
    Mat<T, dim> g = base.diffusion(x);
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k) g(j, k) = g(j, k) / x[j];
    return g;
  }

  template <typename T>
  Vec<T, dim> natural(const Vec<T, dim>& u) const {
    using std::exp;
    using ad::exp;
    Vec<T, dim> x;
    for (int j = 0; j < dim; ++j) x[j] = exp(u[j]);
    return x;
  }

  Vec<double, dim> latent(const Vec<double, dim>& x) const { return x.array().log().matrix(); }

  template <typename T>
  T log_abs_det_natural_jacobian(const Vec<T, dim>& u) const {
    T acc = u[0];
    for (int j = 1; j < dim; ++j) acc = acc + u[j];
    return acc;
  }

  bool in_domain(const Vec<double, dim>& u) const { return u.allFinite(); }

  /// Exact density of the base model carried over to log-coordinates.
  template <typename T>
  T exact_transition_logpdf(const Vec<T, dim>& ua, const Vec<T, dim>& ub, double dt) const
    requires requires(const M& b, const Vec<T, dim>& v) { b.exact_transition_logpdf(v, v, dt); }
  {
    return base.exact_transition_logpdf(natural(ua), natural(ub), dt) + log_abs_det_natural_jacobian(ub);
  }
};

}  // namespace sdelap::models
