#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdelap/inference/parallel.hpp"
#include "sdelap/laplace/laplace.hpp"
#include "sdelap/objective/db_bridge.hpp"
#include "sdelap/objective/path_problem.hpp"

namespace sdelap {

/// p(s, x, t, y) by Laplace over `substeps` steps on [s, t]. x and y are in
/// natural coordinates.
struct TransitionQuery {
  Formulation formulation = Formulation::X;
  double s = 0.0;
  double t = 1.0;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  int substeps = 64;
  FormulationOptions options;
};

template <SdeModel M>
PathProblem<M> bridge_problem(const M& m, const TransitionQuery& q) {
  constexpr int n = M::dim;
  if (q.x.size() != n || q.y.size() != n) throw Error(ErrorKind::InvalidArgument, "endpoint dimension");
  if (!(q.t > q.s)) throw Error(ErrorKind::InvalidArgument, "transition needs t > s");
  typename PathProblem<M>::Spec spec;
  spec.formulation = q.formulation;
  spec.tiny_eps = q.options.tiny_eps;
  spec.grid = bridge_grid(q.s, q.t, q.substeps);
  spec.pin_first = to_latent(m, Vec<double, n>(q.x));
  spec.pin_last = to_latent(m, Vec<double, n>(q.y));
  return PathProblem<M>(m, std::move(spec));
}

/// Laplace result for the transition density in latent coordinates.
template <SdeModel M>
LaplaceResult transition_laplace(const M& m, const TransitionQuery& q, const NewtonConfig& cfg = {}) {
  constexpr int n = M::dim;
  const Vec<double, n> ux = to_latent(m, Vec<double, n>(q.x));
  const Vec<double, n> uy = to_latent(m, Vec<double, n>(q.y));
  if (!ux.allFinite() || !uy.allFinite() || !in_domain(m, ux) || !in_domain(m, uy))
    throw Error(ErrorKind::SupportViolation, "transition endpoint outside the state space");
  if (q.formulation == Formulation::DB) {
    if (!(q.t > q.s)) throw Error(ErrorKind::InvalidArgument, "transition needs t > s");
    DbBridge<M> bridge(m, bridge_grid(q.s, q.t, q.substeps), ux, uy, q.options.mollifier_eps);
    return bridge.laplace(cfg);
  }
  const auto problem = bridge_problem(m, q);
  return laplace(problem, init_path(problem, {}, Vec<double, n>::Zero()), cfg);
}

/// log p(s, x, t, y) in natural coordinates.
template <SdeModel M>
double transition_density(const M& m, const TransitionQuery& q, const NewtonConfig& cfg = {}) {
  constexpr int n = M::dim;
  const LaplaceResult r = transition_laplace(m, q, cfg);
  return r.log_integral - natural_log_jacobian(m, to_latent(m, Vec<double, n>(q.y)));
}

struct SweepEntry {
  double y = 0.0;
  double logp = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty on success
};

/// Independent transition densities for a grid of scalar endpoints y
/// (component 0 of the state; other components from q.y). Failures are
/// recorded per entry.
template <SdeModel M>
std::vector<SweepEntry> density_sweep(const M& m, const TransitionQuery& base, const std::vector<double>& ys,
                                      const NewtonConfig& cfg = {}, int threads = 1) {
  std::vector<SweepEntry> out(ys.size());
  parallel_for(static_cast<int>(ys.size()), threads, [&](int i) {
    TransitionQuery q = base;
    if (q.y.size() == 0) q.y = Eigen::VectorXd::Zero(M::dim);
    q.y[0] = ys[i];
    out[i].y = ys[i];
    try {
      out[i].logp = transition_density(m, q, cfg);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

}  // namespace sdelap
