#pragma once

// Negative log path density over a time grid for the state-space formulations
// (X, S, XDB and the naive controls). Each step term touches only the nodes
// i-1 and i, so the Hessian is block tridiagonal with one block per node.
//
// Latent layout per node i: [x_i unless pinned]. XDB's Brownian increments
// enter psi quadratically, so they are minimized out in closed form and their
// Hessian block is carried in the correction; the Laplace value is the joint
// one over (b, x) without forming the stiff 1/eps^2 blocks.
// States are in the model's latent coordinates (log-states for LogState<M>).

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "sdelap/ad/derivatives.hpp"
#include "sdelap/discretization/grid.hpp"
#include "sdelap/discretization/schemes.hpp"
#include "sdelap/error.hpp"
#include "sdelap/linalg/block_tridiagonal.hpp"
#include "sdelap/model/initial.hpp"
#include "sdelap/model/observation.hpp"
#include "sdelap/objective/formulation.hpp"

namespace sdelap {

/// Observation record attached to a grid node.
struct NodeObservation {
  int node = 0;
  std::vector<double> y;
};

template <SdeModel M>
class PathProblem {
 public:
  static constexpr int n = M::dim;
  using State = Vec<double, n>;

  struct Spec {
    Formulation formulation = Formulation::X;
    double tiny_eps = 1e-4;
    TimeGrid grid;
    std::optional<State> pin_first;
    std::optional<State> pin_last;
    std::optional<ObservationModel> obs;
    std::vector<NodeObservation> observations;
    std::optional<GaussianInit> prior;  // on the natural state at node 0
  };

  PathProblem(M model, Spec spec) : model_(std::move(model)), spec_(std::move(spec)) {
    const auto f = spec_.formulation;
    if (f == Formulation::DB) throw Error(ErrorKind::InvalidArgument, "DB has no state-space objective");
    if (f == Formulation::NaiveExact && !has_exact_density())
      throw Error(ErrorKind::InvalidArgument, "model has no exact transition density");
    if (f == Formulation::XDB && !(spec_.tiny_eps > 0.0))
      throw Error(ErrorKind::InvalidArgument, "tiny_eps must be > 0");
    const int nodes = spec_.grid.node_count();
    if (nodes < 2) throw Error(ErrorKind::InvalidGrid, "path needs at least one step");
    for (int i = 1; i < nodes; ++i)
      if (!(spec_.grid.step(i) > 0.0)) throw Error(ErrorKind::InvalidGrid, "non-positive step");
    if (spec_.prior) prior_.emplace(*spec_.prior);
    node_obs_.assign(nodes, -1);
    for (std::size_t k = 0; k < spec_.observations.size(); ++k) {
      const auto& o = spec_.observations[k];
      if (!spec_.obs) throw Error(ErrorKind::InvalidArgument, "observations without observation model");
      if (o.node < 0 || o.node >= nodes) throw Error(ErrorKind::InvalidArgument, "observation node out of range");
      if (node_obs_[o.node] >= 0) throw Error(ErrorKind::InvalidArgument, "two observations on one node");
      if (static_cast<int>(o.y.size()) != observation_width(*spec_.obs))
        throw Error(ErrorKind::InvalidArgument, "observation record has wrong width");
      node_obs_[o.node] = static_cast<int>(k);
    }
    std::vector<int> sizes(nodes, 0);
    x_free_.assign(nodes, true);
    x_free_[0] = !spec_.pin_first.has_value();
    x_free_[nodes - 1] = !spec_.pin_last.has_value();
    for (int i = 0; i < nodes; ++i) sizes[i] = x_free_[i] ? n : 0;
    pattern_ = linalg::BlockTridiagonal(sizes);
  }

  const M& model() const { return model_; }
  const Spec& spec() const { return spec_; }
  const TimeGrid& grid() const { return spec_.grid; }
  Formulation formulation() const { return spec_.formulation; }
  int node_count() const { return spec_.grid.node_count(); }
  Eigen::Index dim() const { return pattern_.dim(); }
  const std::vector<int>& block_sizes() const { return pattern_.block_sizes(); }
  bool x_free(int node) const { return x_free_[node]; }

  static constexpr bool has_exact_density() {
    return requires(const M& m, const State& x) { m.exact_transition_logpdf(x, x, 1.0); };
  }

  /// Global index of the first component of x_i, or -1 when pinned.
  Eigen::Index x_index(int node) const { return x_free_[node] ? pattern_.offset(node) : -1; }

  template <typename T>
  Vec<T, n> state(const Eigen::Matrix<T, Eigen::Dynamic, 1>& z, int node) const {
    if (x_free_[node]) return z.template segment<n>(x_index(node));
    const State& p = node == 0 ? *spec_.pin_first : *spec_.pin_last;
    return p.template cast<T>();
  }

  std::vector<State> states(const Eigen::VectorXd& z) const {
    std::vector<State> out(node_count());
    for (int i = 0; i < node_count(); ++i) out[i] = state(z, i);
    return out;
  }

  /// Assembles a latent vector from states at all nodes.
  Eigen::VectorXd pack(const std::vector<State>& x) const {
    Eigen::VectorXd z(dim());
    for (int i = 0; i < node_count(); ++i)
      if (x_free_[i]) z.segment<n>(x_index(i)) = x[i];
    return z;
  }

  /// XDB: the minimizing increment of step i given the states,
  /// b = (eps^2 I + G^T G)^-1 G^T d with d = x_i - x_{i-1} - f h.
  State xdb_increment(const Eigen::VectorXd& z, int i) const {
    const double e2 = spec_.tiny_eps * spec_.tiny_eps;
    const State xa = state(z, i - 1);
    const State d = state(z, i) - em_step(model_, xa, spec_.grid.step(i), State(State::Zero()));
    const Mat<double, n> g = model_.diffusion(xa);
    return (e2 * Mat<double, n>::Identity() + g.transpose() * g).ldlt().solve(g.transpose() * d);
  }

  /// Every latent state inside the model domain.
  bool feasible(const Eigen::VectorXd& z) const {
    if (!z.allFinite()) return false;
    for (int i = 0; i < node_count(); ++i)
      if (x_free_[i] && !in_domain(model_, State(z.segment<n>(x_index(i))))) return false;
    return true;
  }

  // ---- terms over a generic scalar ----

  /// Term of step i (1 <= i < nodes) over (x_{i-1}, x_i).
  template <typename T>
  T step_term(int i, const Vec<T, n>& xa, const Vec<T, n>& xb) const {
    const double h = spec_.grid.step(i);
    const double c = 0.5 * n * std::log(2.0 * M_PI * h);
    switch (spec_.formulation) {
      case Formulation::X: {
        const Vec<T, n> inc = em_increment(model_, xa, xb, h);
        return 0.5 * inc.squaredNorm() / h + c;
      }
      case Formulation::S: {
        const Vec<T, n> inc = b_solve_unchecked(model_, xa, xb, h);
        return 0.5 * inc.squaredNorm() / h + c;
      }
      case Formulation::XDB: {
        // min over b of |b|^2/2h + |d - G b|^2 / (2 eps^2 h).
        const double e2 = spec_.tiny_eps * spec_.tiny_eps;
        const Vec<T, n> d = xb - em_step(model_, xa, h, Vec<T, n>(Vec<T, n>::Constant(T(0.0))));
        const Mat<T, n> g = model_.diffusion(xa);
        Mat<T, n> cov = g * g.transpose();
        for (int k = 0; k < n; ++k) cov(k, k) = cov(k, k) + e2;
        const Vec<T, n> w = linalg::solve<T, n>(cov, d);
        return 0.5 * d.dot(w) / h + c + 0.5 * n * std::log(2.0 * M_PI * e2 * h);
      }
      case Formulation::NaiveEm:
        return -em_trans_logpdf_unchecked(model_, xa, xb, h);
      case Formulation::NaiveExact:
        if constexpr (has_exact_density())
          return -model_.exact_transition_logpdf(xa, xb, h);
        break;
      case Formulation::DB:
        break;
    }
    return T(std::numeric_limits<double>::quiet_NaN());
  }

  /// Observation and initial-density terms of node i.
  template <typename T>
  T node_term(int i, const Vec<T, n>& x) const {
    T acc(0.0);
    if (node_obs_[i] >= 0) {
      const auto& o = spec_.observations[node_obs_[i]];
      acc = acc - observation_loglik_unchecked<T, n>(*spec_.obs, to_natural(model_, x), o.y);
    }
    if (i == 0 && prior_) acc = acc + prior_->neg_log_density(model_, x);
    return acc;
  }

  bool has_node_term(int i) const { return node_obs_[i] >= 0 || (i == 0 && prior_); }

  /// psi(z) over any scalar type (double or duals).
  template <typename T>
  T value_generic(const Eigen::Matrix<T, Eigen::Dynamic, 1>& z) const {
    T acc(0.0);
    for (int i = 1; i < node_count(); ++i) acc = acc + step_term<T>(i, state(z, i - 1), state(z, i));
    for (int i = 0; i < node_count(); ++i)
      if (has_node_term(i)) acc = acc + node_term<T>(i, state(z, i));
    return acc;
  }

  /// psi(z); NaN outside the model domain.
  double value(const Eigen::VectorXd& z) const {
    if (!feasible(z)) return std::numeric_limits<double>::quiet_NaN();
    const double v = value_generic<double>(z);
    return std::isfinite(v) ? v : std::numeric_limits<double>::quiet_NaN();
  }

  /// psi(z), its gradient and block-tridiagonal Hessian, assembled term by term.
  double derivatives(const Eigen::VectorXd& z, Eigen::VectorXd& grad, linalg::BlockTridiagonal& hess) const {
    grad.setZero(dim());
    if (hess.block_sizes() != pattern_.block_sizes())
      hess = pattern_;
    else
      hess.set_zero();
    double acc = 0.0;
    acc += assemble_steps(z, grad, hess);
    for (int i = 0; i < node_count(); ++i) {
      if (!has_node_term(i)) continue;
      const State x = state(z, i);
      if (!x_free_[i]) {
        acc += node_term<double>(i, x);
        continue;
      }
      const auto d = ad::value_gradient_hessian<n>([&](const auto& v) { return node_term(i, Vec<ad::Hyper<n>, n>(v)); }, x);
      acc += d.value;
      const Eigen::Index o = x_index(i);
      grad.segment<n>(o) += d.grad;
      hess.diag(i) += d.hess;
    }
    return acc;
  }

  /// Log of the formulation's correction at z: the Jacobian factor for X and
  /// S, the eliminated increments' Gaussian factor for XDB, 0 for the naive
  /// controls.
  double correction_logdet(const Eigen::VectorXd& z) const {
    double acc = 0.0;
    if (spec_.formulation == Formulation::X) {
      for (int i = 1; i < node_count(); ++i)
        acc -= linalg::log_abs_det<double, n>(eval_diffusion(model_, state(z, i - 1), true));
    } else if (spec_.formulation == Formulation::XDB) {
      // -1/2 log|(I + G^T G / eps^2) / h| + n/2 log 2 pi per step.
      const double e2 = spec_.tiny_eps * spec_.tiny_eps;
      for (int i = 1; i < node_count(); ++i) {
        const Mat<double, n> g = model_.diffusion(state(z, i - 1));
        const Mat<double, n> a = e2 * Mat<double, n>::Identity() + g.transpose() * g;
        acc += -0.5 * (linalg::log_abs_det<double, n>(a) - n * std::log(e2 * spec_.grid.step(i))) +
               0.5 * n * std::log(2.0 * M_PI);
      }
    } else if (spec_.formulation == Formulation::S) {
      for (int i = 1; i < node_count(); ++i) {
        const double h = spec_.grid.step(i);
        const State xa = state(z, i - 1);
        const State xb = state(z, i);
        const State b = b_solve(model_, xa, xb, h);
        const Mat<double, n> deta = ad::jacobian<n, n>(
            [&](const auto& y) {
              using D = typename std::decay_t<decltype(y)>::Scalar;
              return strat_residual<M, D>(model_, xa.template cast<D>(), y, h, b.template cast<D>());
            },
            xb);
        const Mat<double, n> gbar = 0.5 * (eval_diffusion(model_, xa) + eval_diffusion(model_, xb));
        acc += linalg::log_abs_det<double, n>(deta) - linalg::log_abs_det<double, n>(gbar);
      }
    }
    if (!std::isfinite(acc)) throw Error(ErrorKind::NonFinite, "Jacobian correction");
    return acc;
  }

 private:
  double assemble_steps(const Eigen::VectorXd& z, Eigen::VectorXd& grad, linalg::BlockTridiagonal& hess) const {
    constexpr int W = 2 * n;
    using H = ad::Hyper<W>;
    double acc = 0.0;
    std::array<Eigen::Index, W> map{};
    for (int i = 1; i < node_count(); ++i) {
      Eigen::Matrix<double, W, 1> local;
      local.template head<n>() = state(z, i - 1);
      local.template tail<n>() = state(z, i);
      const Eigen::Index xa = x_index(i - 1);
      const Eigen::Index xb = x_index(i);
      for (int k = 0; k < n; ++k) {
        map[k] = xa < 0 ? -1 : xa + k;
        map[n + k] = xb < 0 ? -1 : xb + k;
      }
      const auto d = ad::value_gradient_hessian<W>(
          [&](const Eigen::Matrix<H, W, 1>& v) {
            return step_term<H>(i, Vec<H, n>(v.template head<n>()), Vec<H, n>(v.template tail<n>()));
          },
          local);
      acc += d.value;
      scatter<W>(d, map, grad, hess);
    }
    return acc;
  }

  template <int W>
  static void scatter(const ad::LocalDerivatives<W>& d, const std::array<Eigen::Index, W>& map,
                      Eigen::VectorXd& grad, linalg::BlockTridiagonal& hess) {
    for (int r = 0; r < W; ++r) {
      if (map[r] < 0) continue;
      grad[map[r]] += d.grad[r];
      for (int c = 0; c <= r; ++c) {
        if (map[c] < 0) continue;
        // add() folds (c, r) onto the stored triangle; diagonal-block entries
        // are stored in full, so mirror them explicitly.
        if (map[r] == map[c]) {
          hess.add(map[r], map[c], d.hess(r, c));
        } else {
          hess.add(map[r], map[c], d.hess(r, c));
          if (hess.block_of(map[r]) == hess.block_of(map[c])) hess.add(map[c], map[r], d.hess(r, c));
        }
      }
    }
  }

  M model_;
  Spec spec_;
  std::optional<GaussianPrior> prior_;
  std::vector<int> node_obs_;
  std::vector<bool> x_free_;
  linalg::BlockTridiagonal pattern_;
};

}  // namespace sdelap
