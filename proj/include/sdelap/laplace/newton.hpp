#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Core>

#include "sdelap/error.hpp"
#include "sdelap/laplace/result.hpp"
#include "sdelap/linalg/block_tridiagonal.hpp"

namespace sdelap {

/// Objective with block-tridiagonal Hessian, as consumed by find_mode.
template <typename P>
concept SparseObjective = requires(const P& p, const Eigen::VectorXd& z, Eigen::VectorXd& g,
                                   linalg::BlockTridiagonal& h) {
  { p.dim() } -> std::convertible_to<Eigen::Index>;
  { p.value(z) } -> std::convertible_to<double>;
  { p.derivatives(z, g, h) } -> std::convertible_to<double>;
};

struct ModeResult {
  Eigen::VectorXd z;
  double value = 0.0;
  Eigen::VectorXd grad;
  linalg::BlockTridiagonal hessian;
  int iters = 0;
  bool converged = false;
  double grad_norm = 0.0;
};

/// Damped Newton minimization. Failed factorizations get a Levenberg shift
/// mu I (mu doubling from damping_init); steps are backtracked until psi
/// decreases (Armijo) and the trial point is feasible (finite psi).
/// Throws NoConvergence when iterations run out and NotPositiveDefinite when
/// the Hessian at the final point is not positive definite.
template <SparseObjective P>
ModeResult find_mode(const P& problem, Eigen::VectorXd z, const NewtonConfig& cfg) {
  if (z.size() != problem.dim()) throw Error(ErrorKind::InvalidArgument, "initial point has wrong size");
  ModeResult out;
  double f = problem.value(z);
  if (!std::isfinite(f)) throw Error(ErrorKind::NonFinite, "objective at the initial path");
  Eigen::VectorXd g;
  linalg::BlockTridiagonal h;
  f = problem.derivatives(z, g, h);
  if (!std::isfinite(f) || !g.allFinite()) throw Error(ErrorKind::NonFinite, "derivatives at the initial path");

  for (int it = 0;; ++it) {
    const double gnorm = z.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
    out.iters = it;
    if (gnorm <= cfg.grad_tol) {
      out.converged = true;
      break;
    }
    if (it >= cfg.max_iters) break;

    std::optional<linalg::BlockCholesky> chol = linalg::BlockCholesky::try_factor(h);
    double mu = 0.0;
    if (!chol) {
      mu = cfg.damping_init * std::max(1.0, h.max_abs());
      for (int k = 0; k < cfg.max_damping_doublings && !chol; ++k, mu *= 2.0) {
        linalg::BlockTridiagonal shifted = h;
        shifted.add_to_diagonal(mu);
        chol = linalg::BlockCholesky::try_factor(shifted);
      }
      if (!chol) throw Error(ErrorKind::NotPositiveDefinite, "Hessian could not be regularized");
    }
    const Eigen::VectorXd p = -chol->solve(g);
    const double slope = g.dot(p);
    if (!(slope < 0.0)) break;
    // Rounding slack lets a step through when psi is flat to machine precision.
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f));
    if (mu == 0.0 && -0.5 * slope <= cfg.decrement_tol * (1.0 + std::abs(f))) {
      // psi is converged; the gradient may not be. One more full step unless
      // rounding makes it worse.
      const Eigen::VectorXd zt = z + p;
      const double ft = problem.value(zt);
      if (std::isfinite(ft) && ft <= f + slack) {
        Eigen::VectorXd gt;
        linalg::BlockTridiagonal ht;
        const double fd = problem.derivatives(zt, gt, ht);
        if (std::isfinite(fd) && gt.allFinite()) {
          z = zt;
          f = fd;
          g = std::move(gt);
          h = std::move(ht);
          out.iters = it + 1;
        }
      }
      out.converged = true;
      break;
    }
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd zt;
    double ft = 0.0;
    for (int k = 0; k <= cfg.max_halvings; ++k, t *= 0.5) {
      zt = z + t * p;
      ft = problem.value(zt);
      if (std::isfinite(ft) && ft <= f + 1e-4 * t * slope + slack) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No further decrease available at working precision.
      if (-0.5 * slope <= 1e-10 * (1.0 + std::abs(f))) out.converged = true;
      break;
    }
    z = zt;
    f = problem.derivatives(z, g, h);
    if (!std::isfinite(f) || !g.allFinite()) throw Error(ErrorKind::NonFinite, "derivatives along the Newton path");
  }
  out.z = std::move(z);
  out.value = f;
  out.grad = std::move(g);
  out.hessian = std::move(h);
  out.grad_norm = out.z.size() ? out.grad.template lpNorm<Eigen::Infinity>() : 0.0;
  if (!out.converged)
    throw Error(ErrorKind::NoConvergence,
                "Newton stopped after " + std::to_string(out.iters) + " iterations, |grad| = " +
                    std::to_string(out.grad_norm));
  return out;
}

}  // namespace sdelap
