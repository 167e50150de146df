#include "sdelap/model/observation.hpp"

#include <string>

namespace sdelap {

int observation_width(const ObservationModel& obs) {
  if (const auto* g = std::get_if<GaussianAdditive>(&obs)) return static_cast<int>(g->indices.size());
  return 1;
}

void validate(const ObservationModel& obs, int state_dim) {
  if (const auto* g = std::get_if<GaussianAdditive>(&obs)) {
    if (!(g->sd > 0.0)) throw Error(ErrorKind::InvalidArgument, "Gaussian observation sd must be > 0");
    if (g->indices.empty()) throw Error(ErrorKind::InvalidArgument, "no observed indices");
    for (int i : g->indices)
      if (i < 0 || i >= state_dim)
        throw Error(ErrorKind::InvalidArgument, "observed index " + std::to_string(i) + " out of range");
  } else {
    const auto& p = std::get<PoissonScaled>(obs);
    if (!(p.volume > 0.0)) throw Error(ErrorKind::InvalidArgument, "Poisson volume must be > 0");
    if (p.index < 0 || p.index >= state_dim)
      throw Error(ErrorKind::InvalidArgument, "observed index out of range");
  }
}

double observation_loglik(const ObservationModel& obs, const Eigen::VectorXd& x,
                          std::span<const double> y) {
  if (static_cast<int>(y.size()) != observation_width(obs))
    throw Error(ErrorKind::InvalidArgument, "observation record has wrong width");
  if (const auto* p = std::get_if<PoissonScaled>(&obs)) {
    const double mean = p->volume * x[p->index];
    if (!std::isnan(y[0])) {
      if (mean < 0.0) throw Error(ErrorKind::SupportViolation, "negative Poisson expectation");
      if (y[0] < 0.0 || y[0] != std::floor(y[0]))
        throw Error(ErrorKind::SupportViolation, "Poisson count must be a nonnegative integer");
    }
  }
  double acc = 0.0;
  if (const auto* g = std::get_if<GaussianAdditive>(&obs)) {
    const double norm = -std::log(g->sd) - 0.5 * std::log(2.0 * M_PI);
    for (std::size_t j = 0; j < g->indices.size(); ++j) {
      if (std::isnan(y[j])) continue;
      const double z = (y[j] - x[g->indices[j]]) / g->sd;
      acc += -0.5 * z * z + norm;
    }
  } else {
    const auto& p = std::get<PoissonScaled>(obs);
    if (!std::isnan(y[0])) {
      const double mean = p.volume * x[p.index];
      acc = y[0] == 0.0 ? -mean : y[0] * std::log(mean) - mean - std::lgamma(y[0] + 1.0);
    }
  }
  return acc;
}

}  // namespace sdelap
