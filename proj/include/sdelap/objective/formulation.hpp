#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace sdelap {

/// How the path integral is parameterized before the Laplace step.
///  DB   Brownian increments only, endpoint imposed through a Gaussian mollifier.
///  XDB  states and increments, each Euler step perturbed by tiny noise.
///  X    states only, Euler-Maruyama increments, correction prod |g(x_{i-1})|^{-1}.
///  S    states only, Stratonovich trapezoidal increments with determinant correction.
///  NaiveEm / NaiveExact  states only, product of transition densities and no
///       correction. Biased; kept as negative controls.
enum class Formulation { DB, XDB, X, S, NaiveEm, NaiveExact };

inline std::string_view to_string(Formulation f) {
  switch (f) {
    case Formulation::DB: return "db";
    case Formulation::XDB: return "xdb";
    case Formulation::X: return "x";
    case Formulation::S: return "s";
    case Formulation::NaiveEm: return "naive";
    case Formulation::NaiveExact: return "naive_exact";
  }
  return "?";
}

inline std::optional<Formulation> parse_formulation(std::string_view s) {
  for (auto f : {Formulation::DB, Formulation::XDB, Formulation::X, Formulation::S, Formulation::NaiveEm,
                 Formulation::NaiveExact})
    if (s == to_string(f)) return f;
  return std::nullopt;
}

struct FormulationOptions {
  double tiny_eps = 1e-4;       // XDB
  double mollifier_eps = 1e-6;  // DB
};

}  // namespace sdelap
