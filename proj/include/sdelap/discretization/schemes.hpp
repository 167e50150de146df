#pragma once

// One-step discretizations: Euler-Maruyama (Ito) and the trapezoidal
// relation for the Stratonovich form. The generic versions never throw; they
// return non-finite values when g is singular or the state leaves the domain.

#include <cmath>

#include "sdelap/error.hpp"
#include "sdelap/model/sde_model.hpp"
#include "sdelap/model/stratonovich.hpp"

namespace sdelap {

/// x + f(x) dt + g(x) b.
template <SdeModel M, typename T>
Vec<T, M::dim> em_step(const M& m, const Vec<T, M::dim>& x, double dt, const Vec<T, M::dim>& b) {
  return x + m.drift(x) * dt + m.diffusion(x) * b;
}

/// Brownian increment that carries x to y in one Euler-Maruyama step:
/// g(x)^{-1} (y - x - f(x) dt).
template <SdeModel M, typename T>
Vec<T, M::dim> em_increment(const M& m, const Vec<T, M::dim>& x, const Vec<T, M::dim>& y, double dt) {
  const Vec<T, M::dim> r = y - x - m.drift(x) * dt;
  return linalg::solve<T, M::dim>(m.diffusion(x), r);
}

/// log N(y; x + f(x) dt, g(x) g(x)^T dt).
template <SdeModel M, typename T>
T em_trans_logpdf_unchecked(const M& m, const Vec<T, M::dim>& x, const Vec<T, M::dim>& y, double dt) {
  constexpr int n = M::dim;
  const Mat<T, n> g = m.diffusion(x);
  const Vec<T, n> b = linalg::solve<T, n>(g, Vec<T, n>(y - x - m.drift(x) * dt));
  return -0.5 * b.squaredNorm() / dt - 0.5 * n * std::log(2.0 * M_PI * dt) - linalg::log_abs_det<T, n>(g);
}

/// Stratonovich trapezoidal residual
/// eta = y - x - (f_S(x) + f_S(y)) dt/2 - (g(x) + g(y)) b/2.
template <SdeModel M, typename T>
Vec<T, M::dim> strat_residual(const M& m, const Vec<T, M::dim>& x, const Vec<T, M::dim>& y, double dt,
                              const Vec<T, M::dim>& b) {
  const Vec<T, M::dim> fs = stratonovich_drift(m, x) + stratonovich_drift(m, y);
  const Mat<T, M::dim> gs = m.diffusion(x) + m.diffusion(y);
  return y - x - fs * (0.5 * dt) - gs * b * 0.5;
}

/// Unique b with strat_residual(x, y, dt, b) = 0:
/// b = (g(x) + g(y))^{-1} (2y - 2x - (f_S(x) + f_S(y)) dt).
template <SdeModel M, typename T>
Vec<T, M::dim> b_solve_unchecked(const M& m, const Vec<T, M::dim>& x, const Vec<T, M::dim>& y, double dt) {
  const Vec<T, M::dim> fs = stratonovich_drift(m, x) + stratonovich_drift(m, y);
  const Mat<T, M::dim> gs = m.diffusion(x) + m.diffusion(y);
  const Vec<T, M::dim> rhs = (y - x) * 2.0 - fs * dt;
  return linalg::solve<T, M::dim>(gs, rhs);
}

namespace detail {
template <int N>
void require_finite(const Vec<double, N>& v, const char* what) {
  if (!v.allFinite()) throw Error(ErrorKind::NonFinite, what);
}
}  // namespace detail

template <SdeModel M>
Vec<double, M::dim> eval_drift(const M& m, const Vec<double, M::dim>& x) {
  const auto f = m.drift(x);
  detail::require_finite<M::dim>(f, "drift");
  return f;
}

template <SdeModel M>
Mat<double, M::dim> eval_diffusion(const M& m, const Vec<double, M::dim>& x, bool require_invertible = false) {
  const Mat<double, M::dim> g = m.diffusion(x);
  if (!g.allFinite()) throw Error(ErrorKind::NonFinite, "diffusion");
  if (require_invertible && g.determinant() == 0.0) throw Error(ErrorKind::Singular, "diffusion matrix");
  return g;
}

template <SdeModel M>
Vec<double, M::dim> eval_stratonovich_drift(const M& m, const Vec<double, M::dim>& x) {
  const auto f = stratonovich_drift(m, x);
  detail::require_finite<M::dim>(f, "Stratonovich drift");
  return f;
}

template <SdeModel M>
Vec<double, M::dim> em_step_checked(const M& m, const Vec<double, M::dim>& x, double dt,
                                    const Vec<double, M::dim>& b) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be > 0");
  const auto y = em_step(m, x, dt, b);
  detail::require_finite<M::dim>(y, "Euler-Maruyama step");
  return y;
}

template <SdeModel M>
double em_trans_logpdf(const M& m, const Vec<double, M::dim>& x, const Vec<double, M::dim>& y, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be > 0");
  eval_diffusion(m, x, true);
  const double v = em_trans_logpdf_unchecked(m, x, y, dt);
  if (std::isnan(v)) throw Error(ErrorKind::NonFinite, "Euler-Maruyama transition density");
  return v;
}

template <SdeModel M>
Vec<double, M::dim> b_solve(const M& m, const Vec<double, M::dim>& x, const Vec<double, M::dim>& y, double dt) {
  const Mat<double, M::dim> gs = eval_diffusion(m, x) + eval_diffusion(m, y);
  if (gs.determinant() == 0.0) throw Error(ErrorKind::Singular, "g(x) + g(y) is singular");
  const auto b = b_solve_unchecked(m, x, y, dt);
  detail::require_finite<M::dim>(b, "b_solve");
  return b;
}

}  // namespace sdelap
