#pragma once

#include <algorithm>
#include <array>
#include <utility>
#include <vector>

#include "sdelap/laplace/newton.hpp"
#include "sdelap/objective/path_problem.hpp"

namespace sdelap {

/// Laplace value at a converged mode: log of the integral of
/// exp(-psi) times the formulation's correction.
template <SdeModel M>
LaplaceResult laplace_value(const PathProblem<M>& problem, const ModeResult& mode) {
  LaplaceResult out;
  out.mode = mode.z;
  out.psi_at_mode = mode.value;
  out.latent_dim = problem.dim();
  out.newton_iters = mode.iters;
  out.converged = mode.converged;
  out.grad_norm = mode.grad_norm;
  if (problem.dim() > 0) {
    const auto chol = linalg::BlockCholesky::try_factor(mode.hessian);
    if (!chol) throw Error(ErrorKind::NotPositiveDefinite, "Hessian at the mode");
    out.hessian_logdet = chol->log_det();
  }
  out.correction_logdet = problem.correction_logdet(mode.z);
  out.log_integral = laplace_log_integral(out.psi_at_mode, out.hessian_logdet, out.latent_dim, out.correction_logdet);
  return out;
}

/// Value of a state component at a grid node.
struct Anchor {
  int node = 0;
  double value = 0.0;
};

/// Starting path. Component j is interpolated linearly in time between its
/// anchors (latent coordinates) and held constant before the first and after
/// the last one; components without anchors take fill[j]. Pinned nodes are
/// anchors automatically.
template <SdeModel M>
Eigen::VectorXd init_path(const PathProblem<M>& problem, std::array<std::vector<Anchor>, M::dim> anchors,
                          const Vec<double, M::dim>& fill) {
  constexpr int n = M::dim;
  const auto& spec = problem.spec();
  const auto& times = problem.grid().times;
  const int nodes = problem.node_count();
  for (int j = 0; j < n; ++j) {
    if (spec.pin_first) anchors[j].push_back({0, (*spec.pin_first)[j]});
    if (spec.pin_last) anchors[j].push_back({nodes - 1, (*spec.pin_last)[j]});
    std::sort(anchors[j].begin(), anchors[j].end(), [](const Anchor& a, const Anchor& b) { return a.node < b.node; });
  }
  std::vector<Vec<double, n>> xs(nodes);
  for (int j = 0; j < n; ++j) {
    const auto& a = anchors[j];
    std::size_t k = 0;
    for (int i = 0; i < nodes; ++i) {
      if (a.empty()) {
        xs[i][j] = fill[j];
        continue;
      }
      while (k < a.size() && a[k].node < i) ++k;
      if (k == 0) {
        xs[i][j] = a.front().value;
      } else if (k == a.size()) {
        xs[i][j] = a.back().value;
      } else if (a[k].node == i) {
        xs[i][j] = a[k].value;
      } else {
        const auto& lo = a[k - 1];
        const auto& hi = a[k];
        const double w = (times[i] - times[lo.node]) / (times[hi.node] - times[lo.node]);
        xs[i][j] = (1.0 - w) * lo.value + w * hi.value;
      }
    }
  }
  return problem.pack(xs);
}

/// Mode search followed by the Laplace value.
template <SdeModel M>
LaplaceResult laplace(const PathProblem<M>& problem, const Eigen::VectorXd& init, const NewtonConfig& cfg) {
  return laplace_value(problem, find_mode(problem, init, cfg));
}

}  // namespace sdelap
