#pragma once

#include <algorithm>

#include <Eigen/Core>

#include "sdelap/ad/dual.hpp"

namespace sdelap::ad {

template <int W>
using Hyper = Dual<Dual<double, W>, W>;

template <int W>
struct LocalDerivatives {
  double value = 0.0;
  Eigen::Matrix<double, W, 1> grad;
  Eigen::Matrix<double, W, W> hess;
};

/// Value, gradient and dense Hessian of a small function of W variables.
/// `f` must accept Eigen::Matrix<Hyper<W>, W, 1>.
template <int W, typename F>
LocalDerivatives<W> value_gradient_hessian(F&& f, const Eigen::Matrix<double, W, 1>& z) {
  using Inner = Dual<double, W>;
  Eigen::Matrix<Hyper<W>, W, 1> zz;
  for (int i = 0; i < W; ++i) {
    zz[i] = Hyper<W>(Inner(z[i], i));
    zz[i].d[i] = Inner(1.0);
  }
  const Hyper<W> r = f(zz);
  LocalDerivatives<W> out;
  out.value = r.v.v;
  for (int i = 0; i < W; ++i) {
    out.grad[i] = r.v.d[i];
    for (int j = 0; j < W; ++j) out.hess(j, i) = r.d[j].d[i];
  }
  return out;
}

/// Value and gradient of a small function of W variables.
template <int W, typename F>
std::pair<double, Eigen::Matrix<double, W, 1>> value_gradient(F&& f,
                                                               const Eigen::Matrix<double, W, 1>& z) {
  Eigen::Matrix<Dual<double, W>, W, 1> zz;
  for (int i = 0; i < W; ++i) zz[i] = Dual<double, W>(z[i], i);
  const Dual<double, W> r = f(zz);
  Eigen::Matrix<double, W, 1> g;
  for (int i = 0; i < W; ++i) g[i] = r.d[i];
  return {r.v, g};
}

/// Seeds a fixed-size vector of generic scalars as duals in every coordinate.
template <typename T, int N>
Eigen::Matrix<Dual<T, N>, N, 1> seed(const Eigen::Matrix<T, N, 1>& x) {
  Eigen::Matrix<Dual<T, N>, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = Dual<T, N>(x[i], i);
  return out;
}

/// Jacobian of a vector map R^N -> R^M evaluated over a generic scalar T.
template <int M, int N, typename T, typename F>
Eigen::Matrix<T, M, N> jacobian(F&& f, const Eigen::Matrix<T, N, 1>& x) {
  const Eigen::Matrix<Dual<T, N>, M, 1> y = f(seed(x));
  Eigen::Matrix<T, M, N> J;
  for (int r = 0; r < M; ++r)
    for (int c = 0; c < N; ++c) J(r, c) = y[r].d[c];
  return J;
}

/// Gradient of a scalar function of arbitrarily many variables, computed by
/// forward passes over chunks of Chunk seed directions.
template <int Chunk = 8, typename F>
Eigen::VectorXd gradient(F&& f, const Eigen::VectorXd& z) {
  using D = Dual<double, Chunk>;
  const Eigen::Index m = z.size();
  Eigen::VectorXd g(m);
  Eigen::Matrix<D, Eigen::Dynamic, 1> zz(m);
  for (Eigen::Index start = 0; start < m; start += Chunk) {
    const Eigen::Index stop = std::min<Eigen::Index>(m, start + Chunk);
    for (Eigen::Index i = 0; i < m; ++i) zz[i] = D(z[i]);
    for (Eigen::Index i = start; i < stop; ++i) zz[i].d[i - start] = 1.0;
    const D r = f(zz);
    for (Eigen::Index i = start; i < stop; ++i) g[i] = r.d[i - start];
  }
  return g;
}

}  // namespace sdelap::ad
