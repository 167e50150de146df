#pragma once

#include <array>

#include "sdelap/ad/derivatives.hpp"
#include "sdelap/model/sde_model.hpp"

namespace sdelap {

/// Jacobians of the diffusion columns: result[k](j, l) = d g_jk / d x_l.
template <SdeModel M, typename T>
std::array<Mat<T, M::dim>, M::dim> diffusion_column_jacobians(const M& m, const Vec<T, M::dim>& x) {
  constexpr int n = M::dim;
  const auto g = m.diffusion(ad::seed(x));
  std::array<Mat<T, n>, n> out;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) out[k](j, l) = g(j, k).d[l];
  return out;
}

/// Stratonovich drift f_S = f - 1/2 sum_k (grad g_k) g_k, with g_k the k-th
/// column of g. Governs the same process as the Ito equation.
template <SdeModel M, typename T>
Vec<T, M::dim> stratonovich_drift(const M& m, const Vec<T, M::dim>& x) {
  constexpr int n = M::dim;
  Vec<T, n> f = m.drift(x);
  const auto g = m.diffusion(ad::seed(x));
  for (int j = 0; j < n; ++j) {
    T corr(0.0);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) corr = corr + g(j, k).d[l] * g(l, k).v;
    f[j] = f[j] - 0.5 * corr;
  }
  return f;
}

}  // namespace sdelap
