#pragma once

#include <cmath>
#include <variant>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "sdelap/error.hpp"
#include "sdelap/model/sde_model.hpp"

namespace sdelap {

/// Improper flat density; x0 is estimated with the rest of the path.
struct FreeInit {};

/// Known initial state (natural coordinates).
struct DiracInit {
  Eigen::VectorXd x0;
};

/// Gaussian density on the natural initial state.
struct GaussianInit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

using InitialCondition = std::variant<FreeInit, DiracInit, GaussianInit>;

void validate(const InitialCondition& init, int state_dim);

/// Precomputed -log of a Gaussian initial density.
class GaussianPrior {
 public:
  explicit GaussianPrior(const GaussianInit& g) : mean_(g.mean) {
    Eigen::LLT<Eigen::MatrixXd> llt(g.cov);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorKind::InvalidArgument, "initial covariance not positive definite");
    precision_ = llt.solve(Eigen::MatrixXd::Identity(g.cov.rows(), g.cov.cols()));
    const Eigen::MatrixXd l = llt.matrixL();
    norm_ = 0.5 * static_cast<double>(g.mean.size()) * std::log(2.0 * M_PI) +
            l.diagonal().array().log().sum();
  }

  /// -log pi(natural(z)) - log|d natural/d z|.
  template <SdeModel M, typename T>
  T neg_log_density(const M& m, const Vec<T, M::dim>& z) const {
    const Vec<T, M::dim> x = to_natural(m, z);
    Vec<T, M::dim> r;
    for (int i = 0; i < M::dim; ++i) r[i] = x[i] - mean_[i];
    T q(0.0);
    for (int i = 0; i < M::dim; ++i)
      for (int j = 0; j < M::dim; ++j) q = q + r[i] * precision_(i, j) * r[j];
    return 0.5 * q + norm_ - natural_log_jacobian(m, z);
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd precision_;
  double norm_ = 0.0;
};

inline void validate(const InitialCondition& init, int state_dim) {
  if (const auto* d = std::get_if<DiracInit>(&init)) {
    if (d->x0.size() != state_dim || !d->x0.allFinite())
      throw Error(ErrorKind::InvalidArgument, "Dirac initial state must be finite with state dimension");
  } else if (const auto* g = std::get_if<GaussianInit>(&init)) {
    if (g->mean.size() != state_dim || g->cov.rows() != state_dim || g->cov.cols() != state_dim)
      throw Error(ErrorKind::InvalidArgument, "Gaussian initial condition has wrong dimension");
    GaussianPrior check(*g);
  }
}

}  // namespace sdelap
