#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdelap/inference/marginal.hpp"
#include "sdelap/model/params.hpp"

namespace sdelap {

struct FitOptions {
  int max_iters = 200;
  /// Max-norm tolerance on the gradient w.r.t. the transformed parameters.
  double grad_tol = 1e-4;
  /// Relative tolerance on the log-likelihood change between iterates.
  double f_tol = 1e-10;
  /// Central-difference step for gradients, relative to max(1, |phi|).
  double fd_step = 1e-5;
  /// Step for the outer Hessian (transformed coordinates).
  double hessian_step = 1e-3;
  int threads = 1;
  NewtonConfig newton;
};

struct FitResult {
  std::vector<Param> params;         // estimates (fixed ones unchanged)
  std::vector<double> sd;            // per parameter; NaN for fixed or when the Hessian fails
  Eigen::MatrixXd cov;               // over free parameters, natural scale
  std::vector<int> free_index;       // params index of each row of cov
  double loglik = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool hessian_pd = true;
  double grad_norm = 0.0;
  std::string message;
  Eigen::VectorXd mode;              // inner latent mode at the estimate
};

/// log L(theta) for a full parameter vector. `warm` may seed the inner mode
/// search; when `mode` is non-null it receives the mode found (and
/// series_loglik then also checks the heuristic start). Must be safe to
/// call concurrently with distinct `mode` targets.
using LoglikFn =
    std::function<double(const std::vector<double>& theta, const Eigen::VectorXd* warm, Eigen::VectorXd* mode)>;

/// Quasi-Newton (BFGS) maximization over the free parameters on unconstrained
/// scales (log for positive ones), central finite-difference gradients, and
/// standard errors from a finite-difference Hessian mapped back by the delta
/// method.
FitResult maximize_loglik(const LoglikFn& loglik, std::vector<Param> params, const FitOptions& opts);

/// Parameters of a model plus the Gaussian observation sd ("s") when present.
template <SdeModel M>
std::vector<Param> default_params(const M& m, const SeriesSetup& setup) {
  std::vector<Param> out;
  const auto specs = ModelTraits<M>::specs();
  const auto values = ModelTraits<M>::values(m);
  for (std::size_t k = 0; k < specs.size(); ++k) out.push_back({specs[k].name, values[k], false, specs[k].positive});
  if (const auto* g = std::get_if<GaussianAdditive>(&setup.obs)) out.push_back({"s", g->sd, false, true});
  return out;
}

/// Splits a full parameter vector into the model and the observation law.
template <SdeModel M>
std::pair<M, SeriesSetup> apply_params(const std::vector<double>& theta, const SeriesSetup& setup) {
  const std::size_t k = ModelTraits<M>::specs().size();
  M m = ModelTraits<M>::make(std::span<const double>(theta.data(), k));
  SeriesSetup s = setup;
  if (auto* g = std::get_if<GaussianAdditive>(&s.obs)) {
    if (!(theta.at(k) > 0.0)) throw Error(ErrorKind::InvalidArgument, "observation sd must be > 0");
    g->sd = theta[k];
  }
  return {std::move(m), std::move(s)};
}

template <SdeModel M>
LoglikFn series_loglik(const ObservationSeries& data, const SeriesSetup& setup, const NewtonConfig& newton) {
  return [data, setup, newton](const std::vector<double>& theta, const Eigen::VectorXd* warm, Eigen::VectorXd* mode) {
    const auto [m, s] = apply_params<M>(theta, setup);
    const LaplaceResult r = marginal_laplace(m, data, s, newton, warm, mode != nullptr);
    if (mode) *mode = r.mode;
    return r.log_integral;
  };
}

/// Maximum-likelihood fit of `params` (names and order as default_params).
template <SdeModel M>
FitResult fit(const ObservationSeries& data, const SeriesSetup& setup, std::vector<Param> params,
              const FitOptions& opts = {}) {
  return maximize_loglik(series_loglik<M>(data, setup, opts.newton), std::move(params), opts);
}

}  // namespace sdelap
