#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "sdelap/ad/dual.hpp"
#include "sdelap/error.hpp"
#include "sdelap/linalg/small.hpp"

namespace sdelap {

/// y_j = x[indices[j]] + N(0, sd^2), independently.
struct GaussianAdditive {
  std::vector<int> indices{0};
  double sd = 1.0;
};

/// count ~ Poisson(volume * x[index]).
struct PoissonScaled {
  int index = 0;
  double volume = 1.0;
};

using ObservationModel = std::variant<GaussianAdditive, PoissonScaled>;

/// Number of values recorded per observation time.
int observation_width(const ObservationModel& obs);

/// Throws InvalidArgument for sd <= 0, volume <= 0 or indices out of range.
void validate(const ObservationModel& obs, int state_dim);

/// log l(x; y). Missing values (NaN) contribute nothing. Outside the support
/// the result is NaN (negative Poisson mean) or -inf.
template <typename T, int N>
T observation_loglik_unchecked(const ObservationModel& obs, const Vec<T, N>& x,
                               std::span<const double> y) {
  using std::log;
  using ad::log;
  T acc(0.0);
  if (const auto* g = std::get_if<GaussianAdditive>(&obs)) {
    const double norm = -std::log(g->sd) - 0.5 * std::log(2.0 * M_PI);
    for (std::size_t j = 0; j < g->indices.size(); ++j) {
      if (std::isnan(y[j])) continue;
      const T z = (y[j] - x[g->indices[j]]) / g->sd;
      acc = acc - 0.5 * z * z + norm;
    }
  } else {
    const auto& p = std::get<PoissonScaled>(obs);
    if (std::isnan(y[0])) return acc;
    const T mean = p.volume * x[p.index];
    if (ad::value_of(mean) < 0.0) return T(std::numeric_limits<double>::quiet_NaN());
    if (y[0] == 0.0) return -mean;
    acc = y[0] * log(mean) - mean - std::lgamma(y[0] + 1.0);
  }
  return acc;
}

/// Checked observation log-likelihood; throws SupportViolation outside the support.
double observation_loglik(const ObservationModel& obs, const Eigen::VectorXd& x,
                          std::span<const double> y);

}  // namespace sdelap
