#pragma once

#include <concepts>
#include <string_view>

#include "sdelap/linalg/small.hpp"

namespace sdelap {

/// An Ito SDE dX = f(X) dt + g(X) dB with square diffusion, written over a
/// generic scalar so that derivatives come from dual numbers.
///
/// Required: `static constexpr int dim`, templated `drift` and `diffusion`.
/// Optional: `natural`/`latent` (coordinate change used for inference, e.g.
/// log-states), `log_abs_det_natural_jacobian`, `in_domain`.
template <typename M>
concept SdeModel = requires(const M& m, const Vec<double, M::dim>& x) {
  { M::dim } -> std::convertible_to<int>;
  { m.drift(x) } -> std::convertible_to<Vec<double, M::dim>>;
  { m.diffusion(x) } -> std::convertible_to<Mat<double, M::dim>>;
};

/// Maps latent (inference) coordinates to the natural state.
template <SdeModel M, typename T>
Vec<T, M::dim> to_natural(const M& m, const Vec<T, M::dim>& z) {
  if constexpr (requires { m.natural(z); })
    return m.natural(z);
  else
    return z;
}

template <SdeModel M>
Vec<double, M::dim> to_latent(const M& m, const Vec<double, M::dim>& x) {
  if constexpr (requires { m.latent(x); })
    return m.latent(x);
  else
    return x;
}

/// log |det d natural / d latent| at z.
template <SdeModel M, typename T>
T natural_log_jacobian(const M& m, const Vec<T, M::dim>& z) {
  if constexpr (requires { m.log_abs_det_natural_jacobian(z); })
    return m.log_abs_det_natural_jacobian(z);
  else
    return T(0.0);
}

/// Whether a latent state lies in the model's domain (e.g. positivity).
template <SdeModel M>
bool in_domain(const M& m, const Vec<double, M::dim>& z) {
  if constexpr (requires { m.in_domain(z); })
    return m.in_domain(z);
  else
    return true;
}

}  // namespace sdelap
