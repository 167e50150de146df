#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "sdelap/discretization/grid.hpp"
#include "sdelap/discretization/schemes.hpp"
#include "sdelap/model/builtin.hpp"
#include "sdelap/model/log_state.hpp"
#include "sdelap/oracles/exact.hpp"

using namespace sdelap;
using models::Cir;
using models::Gbm;
using models::Ou;

namespace {
Vec<double, 1> v1(double x) { return Vec<double, 1>::Constant(x); }

struct Walk {
  static constexpr int dim = 1;
  template <typename T>
  Vec<T, 1> drift(const Vec<T, 1>&) const {
    return Vec<T, 1>::Constant(T(0.0));
  }
  template <typename T>
  Mat<T, 1> diffusion(const Vec<T, 1>&) const {
    return Mat<T, 1>::Constant(T(1.0));
  }
};

struct Drifting : Walk {
  template <typename T>
  Vec<T, 1> drift(const Vec<T, 1>&) const {
    return Vec<T, 1>::Constant(T(0.7));
  }
};
}  // namespace

TEST_CASE("Euler-Maruyama step examples") {
  CHECK(em_step_checked(Ou{1, 2, 1}, v1(2.0), 0.1, v1(0.0))[0] == 2.0);
  CHECK(em_step_checked(Gbm{1, 1}, v1(1.0), 0.1, v1(0.2))[0] == doctest::Approx(1.3));
  CHECK(em_step_checked(Walk{}, v1(0.37), 0.9, v1(0.0))[0] == 0.37);
  CHECK_THROWS_AS(em_step_checked(Walk{}, v1(0.0), 0.0, v1(0.0)), Error);
}

TEST_CASE("Euler-Maruyama transition density") {
  const double z = 0.8;
  CHECK(em_trans_logpdf(Walk{}, v1(0.0), v1(z), 1.0) == doctest::Approx(-0.5 * z * z - 0.5 * std::log(2 * M_PI)));

  const Ou ou{1, 2, 1};
  const double dt = 1e-3;
  for (double y : {1.97, 2.0, 2.05}) {
    const double em = em_trans_logpdf(ou, v1(2.0), v1(y), dt);
    const double ex = oracles::ou_exact_logpdf(1, 2, 1, 2.0, y, dt);
    CHECK(std::abs(std::exp(em - ex) - 1.0) <= 2 * dt);
  }

  // GBM at the mode of the log-normal oracle, dt = 2^-10.
  const double h = std::ldexp(1.0, -10);
  const double mode = std::exp((1.0 - 0.5) * h - h);
  const double em = em_trans_logpdf(Gbm{1, 1}, v1(1.0), v1(mode), h);
  const double ex = oracles::gbm_exact_logpdf(1, 1, 1.0, mode, h);
  CHECK(std::abs(std::exp(em - ex) - 1.0) <= 0.01);

  try {
    em_trans_logpdf(Cir{1, 1, 0.5}, v1(0.0), v1(0.1), 0.1);
    FAIL("expected Singular");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Singular);
  }
}

TEST_CASE("Euler-Maruyama density integrates to one") {
  using boost::math::quadrature::gauss_kronrod;
  const double inf = std::numeric_limits<double>::infinity();
  auto integral = [&](auto model, double x, double dt) {
    auto f = [&](double y) { return std::exp(em_trans_logpdf(model, v1(x), v1(y), dt)); };
    return gauss_kronrod<double, 61>::integrate(f, -inf, inf, 15, 1e-12);
  };
  CHECK(std::abs(integral(Ou{1, 2, 1}, 0.5, 0.3) - 1.0) <= 1e-6);
  CHECK(std::abs(integral(Gbm{1, 1}, 1.0, 0.1) - 1.0) <= 1e-6);
  CHECK(std::abs(integral(Cir{1, 1, 0.5}, 0.5, 0.05) - 1.0) <= 1e-6);
}

TEST_CASE("trapezoidal residual and b-solve") {
  CHECK(strat_residual<Walk, double>(Walk{}, v1(1.0), v1(1.0), 0.1, v1(0.0))[0] == 0.0);

  const Ou ou{1.5, 0.3, 0.8};
  const auto b = b_solve(ou, v1(0.2), v1(0.5), 0.1);
  CHECK(std::abs(strat_residual<Ou, double>(ou, v1(0.2), v1(0.5), 0.1, b)[0]) < 1e-15);
  const double fs = 1.5 * (0.3 - 0.2) + 1.5 * (0.3 - 0.5);
  CHECK(b[0] == doctest::Approx((0.5 - 0.2 - 0.5 * fs * 0.1) / 0.8));

  const Gbm gbm{1, 1};
  const double eta = strat_residual<Gbm, double>(gbm, v1(1.0), v1(1.2), 0.1, v1(0.0))[0];
  CHECK(eta == doctest::Approx(1.2 - 1.0 - 0.5 * (0.5 * 1.0 + 0.5 * 1.2) * 0.1));

  // Constant g and constant Stratonovich drift: y = x + f_S h gives b = 0.
  CHECK(std::abs(b_solve(Drifting{}, v1(1.0), v1(1.0 + 0.7 * 0.25), 0.25)[0]) < 1e-15);

  const Cir cir{1, 1, 0.5};
  const double h = std::ldexp(1.0, -6);
  const auto bc = b_solve(cir, v1(0.5), v1(0.6), h);
  CHECK(std::abs(strat_residual<Cir, double>(cir, v1(0.5), v1(0.6), h, bc)[0]) <= 1e-12);
}

TEST_CASE("b-solve round trip at random points") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int k = 0; k < 200; ++k) {
    const double dt = 0.2 * u(rng);
    const Cir cir{u(rng), u(rng), u(rng)};
    const auto x = v1(u(rng)), y = v1(u(rng));
    CHECK(std::abs(strat_residual<Cir, double>(cir, x, y, dt, b_solve(cir, x, y, dt))[0]) <= 1e-10);
    models::Rma rma;
    rma.sigma_n = u(rng);
    rma.sigma_p = u(rng);
    const Vec<double, 2> a(u(rng), u(rng)), c(u(rng), u(rng));
    CHECK(strat_residual<models::Rma, double>(rma, a, c, dt, b_solve(rma, a, c, dt)).lpNorm<Eigen::Infinity>() <= 1e-10);
    const models::LogState<models::Rma> lr{rma};
    CHECK(strat_residual<models::LogState<models::Rma>, double>(lr, a, c, dt, b_solve(lr, a, c, dt))
              .lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("build_grid examples") {
  const double a[] = {0.0, 1.0};
  const auto g4 = build_grid(a, 4);
  CHECK(g4.times == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
  const auto g1 = build_grid(a, 1);
  CHECK(g1.times == std::vector<double>{0, 1});
  const double b[] = {0.0, 1.0, 2.0};
  const auto g2 = build_grid(b, 2);
  CHECK(g2.node_count() == 5);
  CHECK(g2.obs_index == std::vector<int>{0, 2, 4});
}

TEST_CASE("build_grid keeps observation times bit-exact") {
  std::vector<double> t = {0.1};
  for (int k = 1; k < 40; ++k) t.push_back(t.back() + 0.1 * (1 + (k % 3)) / 3.0);
  for (int m : {1, 3, 7, 10}) {
    const auto g = build_grid(t, m);
    for (std::size_t k = 0; k < t.size(); ++k) CHECK(g.times[g.obs_index[k]] == t[k]);
    for (int i = 1; i < g.node_count(); ++i) CHECK(g.step(i) > 0.0);
  }
}

TEST_CASE("invalid grids") {
  const double bad[] = {0.0, 0.0};
  CHECK_THROWS_AS(build_grid(bad, 2), Error);
  const double ok[] = {0.0, 1.0};
  CHECK_THROWS_AS(build_grid(ok, 0), Error);
  const double nan[] = {0.0, std::nan("")};
  CHECK_THROWS_AS(build_grid(nan, 1), Error);
}
