#pragma once

// Forward-mode dual numbers with a compile-time number of seed directions.
//
// Dual<T, N> carries a value and N partial derivatives. Nesting
// (Dual<Dual<double, W>, W>) gives second derivatives; model code is written
// once over a generic scalar and instantiated for double and any nesting.

#include <array>
#include <cmath>
#include <limits>
#include <type_traits>

#include <Eigen/Core>

namespace sdelap::ad {

template <typename T, int N>
struct Dual;

template <typename X>
struct is_dual : std::false_type {};
template <typename T, int N>
struct is_dual<Dual<T, N>> : std::true_type {};

template <typename S>
concept Arithmetic = std::is_arithmetic_v<S>;

template <typename T, int N>
struct Dual {
  static_assert(N > 0);
  using value_type = T;
  static constexpr int width = N;

  T v{};
  std::array<T, N> d{};

  constexpr Dual() = default;
  constexpr Dual(const T& value) : v(value) {}
  template <Arithmetic S>
    requires(!std::is_same_v<S, T>)
  constexpr Dual(S value) : v(static_cast<T>(value)) {}
  constexpr Dual(const T& value, int seed) : v(value) { d[seed] = T(1); }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }
  Dual& operator/=(const Dual& o) { return *this = *this / o; }

  friend Dual operator-(const Dual& a) {
    Dual r;
    r.v = -a.v;
    for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
  }
  friend const Dual& operator+(const Dual& a) { return a; }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual r;
    r.v = a.v * b.v;
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    Dual r;
    const T inv = T(1) / b.v;
    r.v = a.v * inv;
    for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
    return r;
  }

  // Inner-scalar operands.
  friend Dual operator+(Dual a, const T& s) { a.v += s; return a; }
  friend Dual operator+(const T& s, Dual a) { a.v += s; return a; }
  friend Dual operator-(Dual a, const T& s) { a.v -= s; return a; }
  friend Dual operator-(const T& s, const Dual& a) { Dual r = -a; r.v += s; return r; }
  friend Dual operator*(Dual a, const T& s) {
    a.v *= s;
    for (int i = 0; i < N; ++i) a.d[i] *= s;
    return a;
  }
  friend Dual operator*(const T& s, Dual a) { return a * s; }
  friend Dual operator/(const Dual& a, const T& s) {
    const T inv = T(1) / s;
    return a * inv;
  }
  friend Dual operator/(const T& s, const Dual& a) { return Dual(s) / a; }

  // Plain arithmetic operands (needed when T is itself a Dual).
  template <Arithmetic S>
  friend Dual operator+(Dual a, S s) { a.v += static_cast<double>(s); return a; }
  template <Arithmetic S>
  friend Dual operator+(S s, Dual a) { a.v += static_cast<double>(s); return a; }
  template <Arithmetic S>
  friend Dual operator-(Dual a, S s) { a.v -= static_cast<double>(s); return a; }
  template <Arithmetic S>
  friend Dual operator-(S s, const Dual& a) { Dual r = -a; r.v += static_cast<double>(s); return r; }
  template <Arithmetic S>
  friend Dual operator*(Dual a, S s) {
    const double k = static_cast<double>(s);
    a.v *= k;
    for (int i = 0; i < N; ++i) a.d[i] *= k;
    return a;
  }
  template <Arithmetic S>
  friend Dual operator*(S s, Dual a) { return a * s; }
  template <Arithmetic S>
  friend Dual operator/(const Dual& a, S s) { return a * (1.0 / static_cast<double>(s)); }
  template <Arithmetic S>
  friend Dual operator/(S s, const Dual& a) { return Dual(T(static_cast<double>(s))) / a; }

  friend bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
  friend bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
  friend bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }
  friend bool operator==(const Dual& a, const Dual& b) { return a.v == b.v; }
  friend bool operator!=(const Dual& a, const Dual& b) { return a.v != b.v; }
  template <Arithmetic S>
  friend bool operator<(const Dual& a, S s) { return a.v < static_cast<double>(s); }
  template <Arithmetic S>
  friend bool operator>(const Dual& a, S s) { return a.v > static_cast<double>(s); }
  template <Arithmetic S>
  friend bool operator<=(const Dual& a, S s) { return a.v <= static_cast<double>(s); }
  template <Arithmetic S>
  friend bool operator>=(const Dual& a, S s) { return a.v >= static_cast<double>(s); }
};

/// Innermost double value of a (possibly nested) dual.
inline double value_of(double x) { return x; }
template <typename T, int N>
double value_of(const Dual<T, N>& x) {
  return value_of(x.v);
}

namespace detail {
// Applies the chain rule for a scalar function with value fv and derivative df at a.v.
template <typename T, int N>
Dual<T, N> chain(const Dual<T, N>& a, const T& fv, const T& df) {
  Dual<T, N> r;
  r.v = fv;
  for (int i = 0; i < N; ++i) r.d[i] = df * a.d[i];
  return r;
}
}  // namespace detail

using std::abs;
using std::atan;
using std::cos;
using std::exp;
using std::expm1;
using std::isfinite;
using std::log;
using std::log1p;
using std::pow;
using std::sin;
using std::sqrt;
using std::tanh;

template <typename T, int N>
Dual<T, N> exp(const Dual<T, N>& a) {
  const T e = exp(a.v);
  return detail::chain(a, e, e);
}
template <typename T, int N>
Dual<T, N> expm1(const Dual<T, N>& a) {
  return detail::chain(a, expm1(a.v), exp(a.v));
}
template <typename T, int N>
Dual<T, N> log(const Dual<T, N>& a) {
  return detail::chain(a, log(a.v), T(1) / a.v);
}
template <typename T, int N>
Dual<T, N> log1p(const Dual<T, N>& a) {
  return detail::chain(a, log1p(a.v), T(1) / (T(1) + a.v));
}
template <typename T, int N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
  const T s = sqrt(a.v);
  return detail::chain(a, s, T(0.5) / s);
}
template <typename T, int N>
Dual<T, N> pow(const Dual<T, N>& a, double p) {
  return detail::chain(a, pow(a.v, p), p * pow(a.v, p - 1.0));
}
template <typename T, int N>
Dual<T, N> pow(const Dual<T, N>& a, const Dual<T, N>& b) {
  return exp(b * log(a));
}
template <typename T, int N>
Dual<T, N> sin(const Dual<T, N>& a) {
  return detail::chain(a, sin(a.v), cos(a.v));
}
template <typename T, int N>
Dual<T, N> cos(const Dual<T, N>& a) {
  return detail::chain(a, cos(a.v), -sin(a.v));
}
template <typename T, int N>
Dual<T, N> tanh(const Dual<T, N>& a) {
  const T t = tanh(a.v);
  return detail::chain(a, t, T(1) - t * t);
}
template <typename T, int N>
Dual<T, N> atan(const Dual<T, N>& a) {
  return detail::chain(a, atan(a.v), T(1) / (T(1) + a.v * a.v));
}
template <typename T, int N>
Dual<T, N> abs(const Dual<T, N>& a) {
  return a.v < T(0) ? -a : a;
}
template <typename T, int N>
bool isfinite(const Dual<T, N>& a) {
  if (!isfinite(a.v)) return false;
  for (const auto& di : a.d)
    if (!isfinite(di)) return false;
  return true;
}

}  // namespace sdelap::ad

namespace Eigen {

template <typename T, int N>
struct NumTraits<sdelap::ad::Dual<T, N>> : GenericNumTraits<double> {
  using Real = sdelap::ad::Dual<T, N>;
  using NonInteger = Real;
  using Nested = Real;
  using Literal = Real;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 1 + N,
    MulCost = 1 + 2 * N,
  };
  static Real epsilon() { return Real(std::numeric_limits<double>::epsilon()); }
  static Real dummy_precision() { return Real(1e-12); }
  static Real highest() { return Real(std::numeric_limits<double>::max()); }
  static Real lowest() { return Real(std::numeric_limits<double>::lowest()); }
  static Real infinity() { return Real(std::numeric_limits<double>::infinity()); }
  static Real quiet_NaN() { return Real(std::numeric_limits<double>::quiet_NaN()); }
  static int digits10() { return std::numeric_limits<double>::digits10; }
};

template <typename T, int N, typename Op>
struct ScalarBinaryOpTraits<sdelap::ad::Dual<T, N>, double, Op> {
  using ReturnType = sdelap::ad::Dual<T, N>;
};
template <typename T, int N, typename Op>
struct ScalarBinaryOpTraits<double, sdelap::ad::Dual<T, N>, Op> {
  using ReturnType = sdelap::ad::Dual<T, N>;
};

}  // namespace Eigen
