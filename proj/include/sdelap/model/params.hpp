#pragma once

#include <span>
#include <string>
#include <vector>

#include "sdelap/error.hpp"
#include "sdelap/model/builtin.hpp"
#include "sdelap/model/log_state.hpp"

namespace sdelap {

struct ParamSpec {
  std::string name;
  bool positive = true;  // estimated on log scale
};

/// A named parameter with its value and whether it is held fixed in fits.
struct Param {
  std::string name;
  double value = 0.0;
  bool fixed = false;
  bool positive = true;
};

/// Maps between a model and its flat parameter vector.
template <typename M>
struct ModelTraits;

template <>
struct ModelTraits<models::Ou> {
  static std::vector<ParamSpec> specs() { return {{"lambda", true}, {"mu", false}, {"sigma", true}}; }
  static std::vector<double> values(const models::Ou& m) { return {m.lambda, m.mu, m.sigma}; }
  static models::Ou make(std::span<const double> p) {
    if (!(p[0] > 0.0) || !(p[2] >= 0.0))
      throw Error(ErrorKind::InvalidArgument, "OU requires lambda > 0 and sigma >= 0");
    return {p[0], p[1], p[2]};
  }
};

template <>
struct ModelTraits<models::Gbm> {
  static std::vector<ParamSpec> specs() { return {{"r", true}, {"sigma", true}}; }
  static std::vector<double> values(const models::Gbm& m) { return {m.r, m.sigma}; }
  static models::Gbm make(std::span<const double> p) {
    if (!(p[0] > 0.0) || !(p[1] > 0.0)) throw Error(ErrorKind::InvalidArgument, "GBM parameters must be > 0");
    return {p[0], p[1]};
  }
};

template <>
struct ModelTraits<models::Cir> {
  static std::vector<ParamSpec> specs() { return {{"lambda", true}, {"xi", true}, {"gamma", true}}; }
  static std::vector<double> values(const models::Cir& m) { return {m.lambda, m.xi, m.gamma}; }
  static models::Cir make(std::span<const double> p) {
    if (!(p[0] > 0.0) || !(p[1] > 0.0) || !(p[2] > 0.0))
      throw Error(ErrorKind::InvalidArgument, "CIR parameters must be > 0");
    return {p[0], p[1], p[2]};
  }
};

/// Rosenzweig-MacArthur parameters use the (beta, cmax) parameterization of the
/// Holling-II response: c = cmax, nbar = cmax / beta.
template <>
struct ModelTraits<models::Rma> {
  static std::vector<ParamSpec> specs() {
    return {{"r", true},    {"K", true},  {"efficiency", true}, {"beta", true},
            {"cmax", true}, {"mu", true}, {"sigma_n", true},    {"sigma_p", true}};
  }
  static std::vector<double> values(const models::Rma& m) {
    return {m.r, m.K, m.efficiency, m.c / m.nbar, m.c, m.mu, m.sigma_n, m.sigma_p};
  }
  static models::Rma make(std::span<const double> p) {
    for (double v : p)
      if (!(v > 0.0)) throw Error(ErrorKind::InvalidArgument, "Rosenzweig-MacArthur parameters must be > 0");
    models::Rma m;
    m.r = p[0];
    m.K = p[1];
    m.efficiency = p[2];
    m.c = p[4];
    m.nbar = p[4] / p[3];
    m.mu = p[5];
    m.sigma_n = p[6];
    m.sigma_p = p[7];
    return m;
  }
};

template <typename M>
struct ModelTraits<models::LogState<M>> {
  static std::vector<ParamSpec> specs() { return ModelTraits<M>::specs(); }
  static std::vector<double> values(const models::LogState<M>& m) { return ModelTraits<M>::values(m.base); }
  static models::LogState<M> make(std::span<const double> p) { return {ModelTraits<M>::make(p)}; }
};

}  // namespace sdelap
