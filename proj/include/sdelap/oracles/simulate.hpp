#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "sdelap/discretization/schemes.hpp"
#include "sdelap/error.hpp"
#include "sdelap/model/observation.hpp"
#include "sdelap/model/series.hpp"
#include "sdelap/oracles/rng.hpp"

namespace sdelap::oracles {

struct SimConfig {
  double t0 = 0.0;
  double T = 10.0;            // horizon; observations at t0 + h, ..., t0 + T
  double h = 1.0;             // observation interval
  int sim_substeps = 100;     // Euler steps per observation interval
  Eigen::VectorXd x0;         // natural coordinates
  std::uint64_t seed = 1;
};

struct SimResult {
  std::vector<double> times;            // fine grid
  std::vector<Eigen::VectorXd> path;    // natural coordinates on the fine grid
  ObservationSeries observations;
  int halved_steps = 0;                 // steps split to stay in the domain
};

namespace detail {

/// One Euler step over dt with Brownian increment db. A step that leaves the
/// domain is split in two at the Brownian-bridge midpoint and retried.
template <SdeModel M>
Vec<double, M::dim> domain_step(const M& m, const Vec<double, M::dim>& x, double dt, const Vec<double, M::dim>& db,
                                Rng& rng, int depth, int& halved) {
  constexpr int n = M::dim;
  const Vec<double, n> y = em_step(m, x, dt, db);
  if (y.allFinite() && in_domain(m, y)) return y;
  if (depth >= 40) throw Error(ErrorKind::DomainExit, "simulation cannot stay in the domain");
  ++halved;
  Vec<double, n> mid;
  for (int k = 0; k < n; ++k) mid[k] = 0.5 * db[k] + std::sqrt(0.25 * dt) * rng.normal();
  const Vec<double, n> half = domain_step(m, x, 0.5 * dt, mid, rng, depth + 1, halved);
  return domain_step(m, half, 0.5 * dt, Vec<double, n>(db - mid), rng, depth + 1, halved);
}

}  // namespace detail

/// Euler-Maruyama simulation in the model's latent coordinates, observed at
/// multiples of h. Deterministic given the seed.
template <SdeModel M>
SimResult simulate(const M& m, const ObservationModel& obs, const SimConfig& cfg) {
  constexpr int n = M::dim;
  if (!(cfg.h > 0.0) || !(cfg.T >= cfg.h) || cfg.sim_substeps < 1)
    throw Error(ErrorKind::InvalidArgument, "simulation needs T >= h > 0 and sim_substeps >= 1");
  if (cfg.x0.size() != n || !cfg.x0.allFinite()) throw Error(ErrorKind::InvalidArgument, "initial state");
  validate(obs, n);
  Rng path_rng(cfg.seed, Stream::Path);
  Rng obs_rng(cfg.seed, Stream::Observations);
  const int intervals = static_cast<int>(std::llround(cfg.T / cfg.h));
  const double dt = cfg.h / cfg.sim_substeps;

  SimResult out;
  Vec<double, n> z = to_latent(m, Vec<double, n>(cfg.x0));
  if (!in_domain(m, z)) throw Error(ErrorKind::DomainExit, "initial state outside the domain");
  out.times.push_back(cfg.t0);
  out.path.push_back(cfg.x0);
  out.observations.t0 = cfg.t0;
  for (int k = 1; k <= intervals; ++k) {
    const double a = cfg.t0 + (k - 1) * cfg.h;
    for (int j = 1; j <= cfg.sim_substeps; ++j) {
      Vec<double, n> db;
      for (int c = 0; c < n; ++c) db[c] = std::sqrt(dt) * path_rng.normal();
      z = detail::domain_step(m, z, dt, db, path_rng, 0, out.halved_steps);
      const double t = j == cfg.sim_substeps ? cfg.t0 + k * cfg.h : a + j * dt;
      out.times.push_back(t);
      out.path.push_back(to_natural(m, z));
    }
    const Eigen::VectorXd x = out.path.back();
    std::vector<double> y;
    if (const auto* g = std::get_if<GaussianAdditive>(&obs)) {
      for (int idx : g->indices) y.push_back(x[idx] + g->sd * obs_rng.normal());
    } else {
      const auto& p = std::get<PoissonScaled>(obs);
      y.push_back(static_cast<double>(obs_rng.poisson(p.volume * std::max(0.0, x[p.index]))));
    }
    out.observations.times.push_back(out.times.back());
    out.observations.values.push_back(std::move(y));
  }
  return out;
}

}  // namespace sdelap::oracles
