#pragma once

// Fixed-size dense kernels over a generic scalar (double or nested duals).
// Eigen's own decompositions are reserved for double; these stay usable under
// automatic differentiation.

#include <array>
#include <cmath>

#include <Eigen/Core>
#include <Eigen/LU>

#include "sdelap/ad/dual.hpp"

namespace sdelap {

template <typename T, int N>
using Vec = Eigen::Matrix<T, N, 1>;
template <typename T, int N>
using Mat = Eigen::Matrix<T, N, N>;

namespace linalg {

template <typename T, int N>
struct SmallLu {
  Mat<T, N> lu;
  std::array<int, N> perm{};
  int sign = 1;
};

template <typename T, int N>
SmallLu<T, N> lu_factor(const Mat<T, N>& a) {
  using std::abs;
  using ad::abs;
  SmallLu<T, N> f{a, {}, 1};
  for (int i = 0; i < N; ++i) f.perm[i] = i;
  for (int k = 0; k < N; ++k) {
    int p = k;
    for (int r = k + 1; r < N; ++r)
      if (abs(ad::value_of(f.lu(r, k))) > abs(ad::value_of(f.lu(p, k)))) p = r;
    if (p != k) {
      f.lu.row(k).swap(f.lu.row(p));
      std::swap(f.perm[k], f.perm[p]);
      f.sign = -f.sign;
    }
    for (int r = k + 1; r < N; ++r) {
      f.lu(r, k) = f.lu(r, k) / f.lu(k, k);
      for (int c = k + 1; c < N; ++c) f.lu(r, c) = f.lu(r, c) - f.lu(r, k) * f.lu(k, c);
    }
  }
  return f;
}

template <typename T, int N>
Vec<T, N> lu_solve(const SmallLu<T, N>& f, const Vec<T, N>& b) {
  Vec<T, N> x;
  for (int i = 0; i < N; ++i) x[i] = b[f.perm[i]];
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < i; ++j) x[i] = x[i] - f.lu(i, j) * x[j];
  for (int i = N - 1; i >= 0; --i) {
    for (int j = i + 1; j < N; ++j) x[i] = x[i] - f.lu(i, j) * x[j];
    x[i] = x[i] / f.lu(i, i);
  }
  return x;
}

/// Solves a x = b. Singular input yields non-finite output.
template <typename T, int N>
Vec<T, N> solve(const Mat<T, N>& a, const Vec<T, N>& b) {
  if constexpr (N == 1) {
    Vec<T, N> x;
    x[0] = b[0] / a(0, 0);
    return x;
  } else {
    return lu_solve(lu_factor(a), b);
  }
}

/// log |det a|. Singular input yields -inf.
template <typename T, int N>
T log_abs_det(const Mat<T, N>& a) {
  using std::abs;
  using std::log;
  using ad::abs;
  using ad::log;
  if constexpr (N == 1) {
    return log(abs(a(0, 0)));
  } else {
    const auto f = lu_factor(a);
    T acc = log(abs(f.lu(0, 0)));
    for (int i = 1; i < N; ++i) acc = acc + log(abs(f.lu(i, i)));
    return acc;
  }
}

}  // namespace linalg
}  // namespace sdelap
