#pragma once

// Brownian-increment ("DB") formulation of a transition density. The latent
// variables are the increments b_1..b_M; the endpoint chi(b) of the Euler path
// started at x is tied to y by a Gaussian mollifier of width eps:
//
//   O(b) = sum_i [|b_i|^2 / (2 h_i) + (n/2) log(2 pi h_i)]
//          + |y - chi(b)|^2 / (2 eps^2) + n log eps + (n/2) log 2 pi.
//
// Its Hessian H = A + C^T C / eps^2 (C = d chi / d b) is dense. Factorizing H
// directly loses roughly eps^-2 in conditioning, so Newton steps and log|H| go
// through the split
//   log|H| = log|A| + log|eps^2 I + C A^{-1} C^T| - 2n log eps,
// with A = D - d^2(lambda^T chi) and the multiplier lambda taken from the
// stationarity condition C^T lambda = D b.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "sdelap/ad/derivatives.hpp"
#include "sdelap/discretization/grid.hpp"
#include "sdelap/discretization/schemes.hpp"
#include "sdelap/error.hpp"
#include "sdelap/laplace/result.hpp"

namespace sdelap {

template <SdeModel M>
class DbBridge {
 public:
  static constexpr int n = M::dim;
  using State = Vec<double, n>;

  DbBridge(M model, TimeGrid grid, State x, State y, double eps)
      : model_(std::move(model)), grid_(std::move(grid)), x_(x), y_(y), eps_(eps) {
    if (!(eps_ > 0.0)) throw Error(ErrorKind::InvalidArgument, "mollifier eps must be > 0");
    if (grid_.step_count() < 1) throw Error(ErrorKind::InvalidGrid, "bridge needs at least one step");
    if (!x_.allFinite() || !y_.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite endpoint");
  }

  int steps() const { return grid_.step_count(); }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(steps()) * n; }

  /// Euler path x_0..x_M driven by b.
  template <typename T>
  std::vector<Vec<T, n>> path(const Eigen::Matrix<T, Eigen::Dynamic, 1>& b) const {
    std::vector<Vec<T, n>> xs(steps() + 1);
    xs[0] = x_.template cast<T>();
    for (int i = 1; i <= steps(); ++i)
      xs[i] = em_step(model_, xs[i - 1], grid_.step(i), Vec<T, n>(b.template segment<n>((i - 1) * n)));
    return xs;
  }

  /// O(b) over a generic scalar.
  template <typename T>
  T objective(const Eigen::Matrix<T, Eigen::Dynamic, 1>& b) const {
    T acc(0.0);
    for (int i = 1; i <= steps(); ++i) {
      const double h = grid_.step(i);
      acc = acc + 0.5 * b.template segment<n>((i - 1) * n).squaredNorm() / h + 0.5 * n * std::log(2.0 * M_PI * h);
    }
    const Vec<T, n> r = y_.template cast<T>() - path(b).back();
    acc = acc + 0.5 * r.squaredNorm() / (eps_ * eps_) + n * std::log(eps_) + 0.5 * n * std::log(2.0 * M_PI);
    return acc;
  }

  /// Increments reproducing the straight line from x to y under the Euler map.
  Eigen::VectorXd initial_increments() const {
    Eigen::VectorXd b(dim());
    const double span = grid_.times.back() - grid_.times.front();
    State prev = x_;
    for (int i = 1; i <= steps(); ++i) {
      const double w = (grid_.times[i] - grid_.times.front()) / span;
      const State next = i == steps() ? y_ : State((1.0 - w) * x_ + w * y_);
      b.template segment<n>((i - 1) * n) = em_increment(model_, prev, next, grid_.step(i));
      prev = next;
    }
    return b;
  }

  /// Laplace approximation of log p(x -> y) by constrained Newton iterations.
  LaplaceResult laplace(const NewtonConfig& cfg, const Eigen::VectorXd* init = nullptr) const {
    Eigen::VectorXd b = init ? *init : initial_increments();
    if (b.size() != dim()) throw Error(ErrorKind::InvalidArgument, "increment vector has wrong size");
    LaplaceResult out;
    out.latent_dim = dim();
    Linearization lin = linearize(b);
    if (!lin.ok) throw Error(ErrorKind::NonFinite, "DB initial path leaves the domain");
    double last_step = std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg.max_iters; ++it) {
      const Eigen::VectorXd delta = newton_step(b, lin);
      const double size = delta.template lpNorm<Eigen::Infinity>();
      out.newton_iters = it + 1;
      double t = 1.0;
      Linearization trial;
      Eigen::VectorXd bt;
      for (int k = 0; k <= cfg.max_halvings; ++k, t *= 0.5) {
        bt = b + t * delta;
        trial = linearize(bt);
        if (trial.ok) break;
      }
      if (!trial.ok) throw Error(ErrorKind::NoConvergence, "DB Newton step cannot stay in the domain");
      b = bt;
      lin = std::move(trial);
      const double scale = 1.0 + b.lpNorm<Eigen::Infinity>();
      if (size <= 1e-12 * scale || (size <= 1e-9 * scale && size >= 0.5 * last_step)) {
        out.converged = true;
        break;
      }
      last_step = size;
    }
    if (!out.converged) throw Error(ErrorKind::NoConvergence, "DB Newton iterations exhausted");

    // Value and log-determinant at the mode; the n log eps terms of O and of
    // -1/2 log|H| cancel and are omitted from both.
    double psi = 0.5 * n * std::log(2.0 * M_PI) + 0.5 * eps_ * eps_ * lin.lambda.squaredNorm();
    for (int i = 1; i <= steps(); ++i) {
      const double h = grid_.step(i);
      psi += 0.5 * b.template segment<n>((i - 1) * n).squaredNorm() / h + 0.5 * n * std::log(2.0 * M_PI * h);
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(lin.a);
    const Eigen::MatrixXd w = lu.solve(lin.c.transpose());
    const Eigen::Matrix<double, n, n> s = eps_ * eps_ * Eigen::Matrix<double, n, n>::Identity() + lin.c * w;
    const Eigen::MatrixXd& u = lu.matrixLU();
    double log_a = 0.0;
    int sign = static_cast<int>(lu.permutationP().determinant());
    for (Eigen::Index k = 0; k < u.rows(); ++k) {
      log_a += std::log(std::abs(u(k, k)));
      if (u(k, k) < 0.0) sign = -sign;
    }
    const double det_s = s.determinant();
    if (sign * det_s <= 0.0 || !std::isfinite(log_a))
      throw Error(ErrorKind::NotPositiveDefinite, "DB Hessian at the mode");
    const double reduced_logdet = log_a + std::log(std::abs(det_s));

    out.mode = b;
    out.psi_at_mode = psi;
    out.hessian_logdet = reduced_logdet - 2.0 * n * std::log(eps_);
    out.correction_logdet = 0.0;
    out.log_integral = laplace_log_integral(psi, reduced_logdet, dim(), 0.0);
    out.grad_norm = (lin.d.asDiagonal() * b - lin.c.transpose() * ((y_ - lin.end) / (eps_ * eps_))).template lpNorm<Eigen::Infinity>();
    return out;
  }

 private:
  struct Linearization {
    bool ok = false;
    State end;
    Eigen::VectorXd d;          // diagonal of D, 1/h_i per component
    Eigen::Matrix<double, n, Eigen::Dynamic> c;
    Eigen::Matrix<double, n, 1> lambda;
    Eigen::MatrixXd a;          // D - d^2(lambda^T chi)
  };

  Linearization linearize(const Eigen::VectorXd& b) const {
    Linearization lin;
    const int m = steps();
    const auto xs = path(b);
    for (const auto& x : xs)
      if (!x.allFinite() || !in_domain(model_, x)) return lin;
    lin.end = xs.back();

    std::vector<Mat<double, n>> jx(m + 1), jb(m + 1);
    for (int i = 1; i <= m; ++i) {
      const double h = grid_.step(i);
      const State bi = b.template segment<n>((i - 1) * n);
      jx[i] = ad::jacobian<n, n>(
          [&](const auto& x) {
            using D = typename std::decay_t<decltype(x)>::Scalar;
            return em_step<M, D>(model_, x, h, bi.template cast<D>());
          },
          xs[i - 1]);
      jb[i] = model_.diffusion(xs[i - 1]);
      if (!jx[i].allFinite() || !jb[i].allFinite()) return lin;
    }

    lin.d.resize(dim());
    for (int i = 1; i <= m; ++i) lin.d.template segment<n>((i - 1) * n).setConstant(1.0 / grid_.step(i));

    lin.c.resize(n, dim());
    for (int l = 0; l < n; ++l) {
      State a = State::Unit(l);
      for (int i = m; i >= 1; --i) {
        lin.c.row(l).template segment<n>((i - 1) * n) = (jb[i].transpose() * a).transpose();
        a = jx[i].transpose() * a;
      }
    }
    const Eigen::Matrix<double, n, n> cc = lin.c * lin.c.transpose();
    lin.lambda = cc.ldlt().solve(lin.c * lin.d.asDiagonal() * b);

    // Local second derivatives of a_i^T F_i(x, b) with the adjoints a_i.
    constexpr int W = 2 * n;
    std::vector<Mat<double, n>> hxx(m + 1), hxb(m + 1);
    State a = lin.lambda;
    for (int i = m; i >= 1; --i) {
      const double h = grid_.step(i);
      Eigen::Matrix<double, W, 1> z;
      z << xs[i - 1], b.template segment<n>((i - 1) * n);
      const auto d = ad::value_gradient_hessian<W>(
          [&](const Eigen::Matrix<ad::Hyper<W>, W, 1>& v) {
            const Vec<ad::Hyper<W>, n> xv = v.template head<n>();
            const Vec<ad::Hyper<W>, n> bv = v.template tail<n>();
            const Vec<ad::Hyper<W>, n> f = em_step(model_, xv, h, bv);
            ad::Hyper<W> acc(0.0);
            for (int k = 0; k < n; ++k) acc = acc + a[k] * f[k];
            return acc;
          },
          z);
      hxx[i] = d.hess.template topLeftCorner<n, n>();
      hxb[i] = d.hess.template topRightCorner<n, n>();
      a = jx[i].transpose() * a;
    }

    // K = d^2(lambda^T chi) column by column: forward tangent, then the
    // second-order adjoint sweep.
    lin.a = lin.d.asDiagonal();
    std::vector<State> xdot(m + 1);
    for (int j = 1; j <= m; ++j) {
      for (int c = 0; c < n; ++c) {
        for (int i = 0; i < j; ++i) xdot[i].setZero();
        const State v = State::Unit(c);
        xdot[j] = jb[j] * v;
        for (int i = j + 1; i <= m; ++i) xdot[i] = jx[i] * xdot[i - 1];
        State adot = State::Zero();
        const Eigen::Index col = (j - 1) * n + c;
        for (int i = m; i >= 1; --i) {
          const State kv = jb[i].transpose() * adot + hxb[i].transpose() * xdot[i - 1];
          lin.a.col(col).template segment<n>((i - 1) * n) -= kv;
          adot = jx[i].transpose() * adot + hxx[i] * xdot[i - 1];
          if (i == j) adot += hxb[i] * v;
        }
      }
    }
    lin.a = 0.5 * (lin.a + lin.a.transpose()).eval();
    lin.ok = lin.a.allFinite() && lin.c.allFinite();
    return lin;
  }

  /// Newton step for O through the Woodbury split:
  /// delta = -u + w S^{-1} (C u + r), u = A^{-1} D b, w = A^{-1} C^T.
  Eigen::VectorXd newton_step(const Eigen::VectorXd& b, const Linearization& lin) const {
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(lin.a);
    const Eigen::VectorXd u = lu.solve(lin.d.asDiagonal() * b);
    const Eigen::MatrixXd w = lu.solve(lin.c.transpose());
    const Eigen::Matrix<double, n, n> s = eps_ * eps_ * Eigen::Matrix<double, n, n>::Identity() + lin.c * w;
    const State r = y_ - lin.end;
    const State rhs = lin.c * u + r;
    const Eigen::VectorXd delta = -u + w * s.partialPivLu().solve(rhs);
    if (!delta.allFinite()) throw Error(ErrorKind::NonFinite, "DB Newton step");
    return delta;
  }

  M model_;
  TimeGrid grid_;
  State x_;
  State y_;
  double eps_;
};

}  // namespace sdelap
