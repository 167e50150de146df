#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sdelap/laplace/laplace.hpp"
#include "sdelap/model/initial.hpp"
#include "sdelap/model/series.hpp"
#include "sdelap/objective/path_problem.hpp"

namespace sdelap {

/// Everything besides the model and data that defines L(theta).
struct SeriesSetup {
  ObservationModel obs = GaussianAdditive{};
  InitialCondition init = FreeInit{};
  Formulation formulation = Formulation::XDB;
  int substeps = 8;
  FormulationOptions options;
};

/// One joint latent problem over all grid states of the series.
template <SdeModel M>
PathProblem<M> series_problem(const M& m, const ObservationSeries& data, const SeriesSetup& setup) {
  constexpr int n = M::dim;
  if (setup.formulation == Formulation::DB)
    throw Error(ErrorKind::InvalidArgument, "DB is implemented for transition densities only");
  validate(setup.obs, n);
  validate(setup.init, n);
  data.validate(observation_width(setup.obs));
  std::vector<double> anchors;
  const bool obs_at_t0 = data.times.front() == data.t0;
  if (!obs_at_t0) anchors.push_back(data.t0);
  anchors.insert(anchors.end(), data.times.begin(), data.times.end());
  typename PathProblem<M>::Spec spec;
  spec.formulation = setup.formulation;
  spec.tiny_eps = setup.options.tiny_eps;
  spec.grid = build_grid(anchors, setup.substeps);
  spec.obs = setup.obs;
  const int shift = obs_at_t0 ? 0 : 1;
  for (std::size_t k = 0; k < data.size(); ++k)
    spec.observations.push_back({spec.grid.obs_index[k + shift], data.values[k]});
  if (const auto* d = std::get_if<DiracInit>(&setup.init)) {
    const Vec<double, n> z0 = to_latent(m, Vec<double, n>(d->x0));
    if (!z0.allFinite() || !in_domain(m, z0)) throw Error(ErrorKind::SupportViolation, "initial state outside the domain");
    spec.pin_first = z0;
  } else if (const auto* g = std::get_if<GaussianInit>(&setup.init)) {
    spec.prior = *g;
  }
  return PathProblem<M>(m, std::move(spec));
}

/// Starting path from the observations: Gaussian records give the observed
/// components directly, Poisson counts give count / volume (floored at 1e-3).
/// Unobserved components start at the initial mean when one is given, else 1.
template <SdeModel M>
Eigen::VectorXd series_init(const PathProblem<M>& problem, const SeriesSetup& setup) {
  constexpr int n = M::dim;
  const auto& m = problem.model();
  Vec<double, n> fill_nat = Vec<double, n>::Ones();
  if (const auto* d = std::get_if<DiracInit>(&setup.init)) fill_nat = d->x0;
  if (const auto* g = std::get_if<GaussianInit>(&setup.init)) fill_nat = g->mean;
  // Natural-scale anchors, mapped to latent coordinates componentwise through
  // a full state built on fill_nat.
  std::array<std::vector<Anchor>, n> nat;
  const auto& obs_nodes = problem.spec().observations;
  for (std::size_t k = 0; k < obs_nodes.size(); ++k) {
    const auto& rec = obs_nodes[k].y;
    if (const auto* g = std::get_if<GaussianAdditive>(&setup.obs)) {
      for (std::size_t j = 0; j < g->indices.size(); ++j)
        if (!std::isnan(rec[j])) nat[g->indices[j]].push_back({obs_nodes[k].node, rec[j]});
    } else {
      const auto& p = std::get<PoissonScaled>(setup.obs);
      if (!std::isnan(rec[0])) nat[p.index].push_back({obs_nodes[k].node, std::max(rec[0] / p.volume, 1e-3)});
    }
  }
  if (const auto* g = std::get_if<GaussianInit>(&setup.init))
    for (int j = 0; j < n; ++j) nat[j].push_back({0, g->mean[j]});
  std::array<std::vector<Anchor>, n> lat;
  for (int j = 0; j < n; ++j)
    for (const auto& a : nat[j]) {
      Vec<double, n> x = fill_nat;
      x[j] = a.value;
      Vec<double, n> z = to_latent(m, x);
      if (!z.allFinite() || !in_domain(m, z)) {
        x[j] = std::max(a.value, 1e-3);
        z = to_latent(m, x);
      }
      lat[j].push_back({a.node, z[j]});
    }
  const Vec<double, n> fill = to_latent(m, fill_nat);
  Eigen::VectorXd z = init_path(problem, lat, fill);
  if (!problem.feasible(z)) {
    // Natural-scale positive models: pull infeasible components up to the floor.
    for (int i = 0; i < problem.node_count(); ++i) {
      if (!problem.x_free(i)) continue;
      auto seg = z.template segment<n>(problem.x_index(i));
      for (int j = 0; j < n; ++j)
        if (!(seg[j] > 1e-3) && !in_domain(m, Vec<double, n>(seg))) seg[j] = 1e-3;
    }
  }
  return z;
}

/// Laplace approximation of L(theta). `warm` (a previous mode of the same
/// layout) replaces the heuristic start when given; if the inner solve from
/// it fails, the heuristic start is tried before giving up. With
/// `check_cold`, the heuristic start is solved as well and the mode with the
/// lower psi wins: a warm start carried along by the outer optimizer can
/// settle in a shallow, nearly singular minimum whose small log-determinant
/// inflates L.
template <SdeModel M>
LaplaceResult marginal_laplace(const M& m, const ObservationSeries& data, const SeriesSetup& setup,
                               const NewtonConfig& cfg = {}, const Eigen::VectorXd* warm = nullptr,
                               bool check_cold = false) {
  const auto problem = series_problem(m, data, setup);
  auto recoverable = [](const Error& e) {
    return e.kind() == ErrorKind::NoConvergence || e.kind() == ErrorKind::NotPositiveDefinite ||
           e.kind() == ErrorKind::NonFinite;
  };
  std::optional<LaplaceResult> from_warm;
  if (warm && warm->size() == problem.dim() && std::isfinite(problem.value(*warm))) {
    try {
      from_warm = laplace(problem, *warm, cfg);
    } catch (const Error& e) {
      if (!recoverable(e)) throw;
    }
  }
  if (from_warm && !check_cold) return *from_warm;
  try {
    LaplaceResult cold = laplace(problem, series_init(problem, setup), cfg);
    if (from_warm && from_warm->psi_at_mode <= cold.psi_at_mode) return *from_warm;
    return cold;
  } catch (const Error& e) {
    if (!from_warm || !recoverable(e)) throw;
    return *from_warm;
  }
}

template <SdeModel M>
double marginal_loglik(const M& m, const ObservationSeries& data, const SeriesSetup& setup,
                       const NewtonConfig& cfg = {}) {
  return marginal_laplace(m, data, setup, cfg).log_integral;
}

struct SmoothResult {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> mean;         // mode, natural coordinates
  std::vector<Eigen::VectorXd> sd;           // marginal sd, natural coordinates (delta method)
  std::vector<Eigen::VectorXd> latent_mean;
  std::vector<Eigen::VectorXd> latent_sd;
  LaplaceResult laplace;
};

/// Posterior mode and marginal standard deviations at every grid time.
/// `warm` (e.g. the mode kept by a fit) is compared against the heuristic
/// start as in marginal_laplace.
template <SdeModel M>
SmoothResult smooth(const M& m, const ObservationSeries& data, const SeriesSetup& setup,
                    const NewtonConfig& cfg = {}, const Eigen::VectorXd* warm = nullptr) {
  constexpr int n = M::dim;
  const auto problem = series_problem(m, data, setup);
  SmoothResult out;
  out.laplace = marginal_laplace(m, data, setup, cfg, warm, true);
  const Eigen::VectorXd& mode = out.laplace.mode;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(problem.dim());
  if (problem.dim() > 0) {
    Eigen::VectorXd g;
    linalg::BlockTridiagonal h;
    problem.derivatives(mode, g, h);
    var = linalg::BlockCholesky::factor(h).marginal_variances();
  }
  for (int i = 0; i < problem.node_count(); ++i) {
    const Vec<double, n> z = problem.state(mode, i);
    Vec<double, n> zsd = Vec<double, n>::Zero();
    if (problem.x_free(i))
      zsd = var.template segment<n>(problem.x_index(i)).cwiseMax(0.0).cwiseSqrt();
    // Delta method through the latent-to-natural map.
    const Mat<double, n> jac = ad::jacobian<n, n>([&](const auto& u) { return to_natural(m, u); }, z);
    Vec<double, n> sd;
    for (int j = 0; j < n; ++j) sd[j] = std::abs(jac(j, j)) * zsd[j];
    out.times.push_back(problem.grid().times[i]);
    out.mean.push_back(to_natural(m, z));
    out.sd.push_back(sd);
    out.latent_mean.push_back(z);
    out.latent_sd.push_back(zsd);
  }
  return out;
}

}  // namespace sdelap
