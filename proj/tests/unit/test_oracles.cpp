#include <cmath>
#include <numeric>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "doctest.h"
#include "sdelap/model/builtin.hpp"
#include "sdelap/model/log_state.hpp"
#include "sdelap/oracles/exact.hpp"
#include "sdelap/oracles/kalman.hpp"
#include "sdelap/oracles/rng.hpp"
#include "sdelap/oracles/simulate.hpp"

using namespace sdelap;
using namespace sdelap::oracles;
using boost::math::quadrature::gauss_kronrod;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

double normal_logpdf(double y, double m, double v) { return -0.5 * (y - m) * (y - m) / v - 0.5 * std::log(2 * M_PI * v); }

template <typename F>
double integrate(F f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}
}  // namespace

TEST_CASE("OU exact density") {
  CHECK(ou_exact_logpdf(1, 2, 1, 2, 2, 1) == doctest::Approx(normal_logpdf(2, 2, (1 - std::exp(-2.0)) / 2)).epsilon(1e-14));
  CHECK(ou_exact_logpdf(0.7, 0.3, 0.9, 5.0, 1.1, 200.0) ==
        doctest::Approx(normal_logpdf(1.1, 0.3, 0.81 / 1.4)).epsilon(1e-12));
  const double dt = 1e-8;
  CHECK(ou_exact_logpdf(1, 0, 2, 0.4, 0.4, dt) == doctest::Approx(-0.5 * std::log(2 * M_PI * 4 * dt)).epsilon(1e-6));
  const double mass = integrate([](double y) { return std::exp(ou_exact_logpdf(1.3, 0.2, 0.6, 1.0, y, 0.4)); }, -kInf, kInf);
  CHECK(std::abs(mass - 1.0) <= 1e-8);
}

TEST_CASE("GBM exact density") {
  CHECK(gbm_exact_logpdf(1, 1, 1, 1, 1) == doctest::Approx(normal_logpdf(0.0, 0.5, 1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(gbm_exact_logpdf(1, 1, 1, 0, 1), Error);
  CHECK_THROWS_AS(gbm_exact_logpdf(1, 1, -1, 1, 1), Error);
  // Zero log-drift keeps the median at x.
  const double sigma = 0.8, r = 0.32, x = 1.7;
  const double below = integrate([&](double y) { return std::exp(gbm_exact_logpdf(r, sigma, x, y, 2.0)); }, 0.0, x);
  CHECK(below == doctest::Approx(0.5).epsilon(1e-9));
  const double mass = integrate([&](double y) { return std::exp(gbm_exact_logpdf(r, sigma, x, y, 2.0)); }, 0.0, kInf);
  CHECK(std::abs(mass - 1.0) <= 1e-8);
}

TEST_CASE("log-Bessel function against Boost") {
  for (double nu : {-0.5, 0.0, 0.3, 1.0, 3.7, 15.0})
    for (double z : {1e-6, 0.01, 0.5, 2.0, 10.0, 80.0, 500.0}) {
      CAPTURE(nu);
      CAPTURE(z);
      const double ref = std::log(boost::math::cyl_bessel_i(nu, z));
      CHECK(log_bessel_i(nu, z) == doctest::Approx(ref).epsilon(1e-11));
    }
  // Beyond double range of I itself.
  CHECK(std::isfinite(log_bessel_i(2.0, 5000.0)));
  CHECK(log_bessel_i(2.0, 5000.0) == doctest::Approx(5000.0 - 0.5 * std::log(2 * M_PI * 5000.0)).epsilon(1e-6));
}

TEST_CASE("CIR exact density") {
  const double lam = 1.0, xi = 1.0, gam = 0.5;
  for (double dt : {0.05, 1.0, 3.0})
    for (double y : {0.2, 0.9, 1.7}) {
      const double c = 2 * lam / (gam * gam * (1 - std::exp(-lam * dt)));
      const boost::math::non_central_chi_squared law(4 * lam * xi / (gam * gam), 2 * c * 0.5 * std::exp(-lam * dt));
      const double ref = std::log(2 * c * boost::math::pdf(law, 2 * c * y));
      CHECK(cir_exact_logpdf(lam, xi, gam, 0.5, y, dt) == doctest::Approx(ref).epsilon(1e-10));
    }
  CHECK(cir_exact_logpdf(lam, xi, gam, 0.5, 1.2, 60.0) == doctest::Approx(cir_stationary_logpdf(lam, xi, gam, 1.2)).epsilon(1e-12));
  CHECK(cir_stationary_logpdf(lam, xi, gam, 1.2) ==
        doctest::Approx(8 * std::log(8.0) - std::lgamma(8.0) + 7 * std::log(1.2) - 8 * 1.2).epsilon(1e-13));
  CHECK_THROWS_AS(cir_exact_logpdf(lam, xi, gam, 0.5, 0.0, 1.0), Error);
  CHECK(std::isfinite(cir_exact_logpdf(lam, xi, gam, 0.0, 0.3, 1.0)));

  auto pdf = [&](double y) { return std::exp(cir_exact_logpdf(lam, xi, gam, 0.5, y, 1.0)); };
  CHECK(std::abs(integrate(pdf, 0.0, kInf) - 1.0) <= 1e-8);
  const double mean = integrate([&](double y) { return y * pdf(y); }, 0.0, kInf);
  CHECK(mean == doctest::Approx(xi + (0.5 - xi) * std::exp(-lam)).epsilon(1e-9));
  // Non-Feller parameters still normalize.
  auto rough = [&](double y) { return std::exp(cir_exact_logpdf(1.0, 0.1, 1.0, 0.3, y, 0.5)); };
  // Integrable singularity at 0 (df < 2).
  const double near = boost::math::quadrature::tanh_sinh<double>().integrate(rough, 0.0, 1.0);
  CHECK(std::abs(near + integrate(rough, 1.0, kInf) - 1.0) <= 1e-6);
}

TEST_CASE("Kalman filter against the dense joint Gaussian") {
  std::vector<double> times;
  for (int i = 0; i < 20; ++i) times.push_back(0.25 * i + 0.01 * i * i);
  for (OuScheme s : {OuScheme::Exact, OuScheme::EulerMaruyama, OuScheme::Trapezoidal}) {
    LinearChain ch = ou_chain(1.2, 0.5, 0.8, times, s);
    ch.R(0, 0) = 0.09;
    for (int i = 0; i < 20; ++i)
      if (i % 3 != 1) ch.y[i] = Eigen::VectorXd::Constant(1, 0.5 + std::sin(0.7 * i));
    ch.y[5][0] = std::nan("");
    const auto kf = kalman_loglik_and_smooth(ch);
    CHECK(kf.loglik == doctest::Approx(dense_gaussian_loglik(ch)).epsilon(1e-9));
    for (const auto& c : kf.smoothed_cov) CHECK(c(0, 0) > 0.0);
  }
}

TEST_CASE("Kalman smoother edge cases") {
  const std::vector<double> times = {0.0, 0.5, 1.0, 1.5};
  LinearChain ch = ou_chain(1.0, 2.0, 1.0, times, OuScheme::Exact);
  ch.m0[0] = 0.0;
  ch.P0(0, 0) = 0.3;
  auto kf = kalman_loglik_and_smooth(ch);
  CHECK(kf.loglik == 0.0);
  double m = 0.0, v = 0.3;
  for (int i = 1; i < 4; ++i) {
    m = ch.F[i](0, 0) * m + ch.c[i][0];
    v = ch.F[i](0, 0) * ch.F[i](0, 0) * v + ch.Q[i](0, 0);
    CHECK(kf.smoothed_mean[i][0] == doctest::Approx(m).epsilon(1e-14));
    CHECK(kf.smoothed_sd[i][0] == doctest::Approx(std::sqrt(v)).epsilon(1e-14));
  }
  ch.R(0, 0) = 0.0;
  ch.y[2] = Eigen::VectorXd::Constant(1, 1.7);
  kf = kalman_loglik_and_smooth(ch);
  CHECK(kf.smoothed_sd[2][0] <= 1e-12);
  CHECK(kf.smoothed_mean[2][0] == doctest::Approx(1.7).epsilon(1e-14));
}

TEST_CASE("random variates") {
  Rng a(42, Stream::Test), b(42, Stream::Test), c(42, Stream::Path);
  for (int i = 0; i < 10; ++i) CHECK(a.normal() == b.normal());
  CHECK(a.uniform() != c.uniform());

  Rng rng(7, Stream::Test);
  const int n = 200000;
  double s1 = 0, s2 = 0, umin = 1, umax = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
    const double u = rng.uniform();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
  }
  CHECK(std::abs(s1 / n) < 4 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1) < 4 * std::sqrt(2.0 / n));
  CHECK(umin > 0.0);
  CHECK(umax < 1.0);

  for (double mean : {0.0, 0.7, 8.0, 29.5, 30.0, 250.0}) {
    CAPTURE(mean);
    double m1 = 0, m2 = 0;
    const int k = 50000;
    for (int i = 0; i < k; ++i) {
      const auto v = static_cast<double>(rng.poisson(mean));
      CHECK_MESSAGE(v >= 0, "negative count");
      m1 += v;
      m2 += v * v;
    }
    m1 /= k;
    const double var = m2 / k - m1 * m1;
    CHECK(std::abs(m1 - mean) <= 4 * std::sqrt(std::max(mean, 1e-12) / k) + 1e-12);
    if (mean > 0) CHECK(std::abs(var / mean - 1) < 0.05);
  }
  for (double shape : {0.3, 1.0, 4.5}) {
    double m1 = 0;
    const int k = 50000;
    for (int i = 0; i < k; ++i) m1 += rng.gamma(shape);
    CHECK(std::abs(m1 / k - shape) < 4 * std::sqrt(shape / k));
  }
  double m1 = 0;
  const int k = 50000;
  for (int i = 0; i < k; ++i) m1 += rng.noncentral_chi_squared(3.0, 2.0);
  CHECK(std::abs(m1 / k - 5.0) < 4 * std::sqrt(2 * (3.0 + 4.0) / k));
}

TEST_CASE("exact CIR sampler reproduces the transition mean and variance") {
  Rng rng(3, Stream::Test);
  const double lam = 1.0, xi = 1.0, gam = 0.5, x = 0.5, dt = 1.0;
  const int k = 100000;
  double m1 = 0, m2 = 0;
  for (int i = 0; i < k; ++i) {
    const double y = cir_exact_sample(lam, xi, gam, x, dt, rng);
    m1 += y;
    m2 += y * y;
  }
  m1 /= k;
  const double var = m2 / k - m1 * m1;
  const double e = std::exp(-lam * dt);
  const double mean = xi + (x - xi) * e;
  const double ref_var = x * gam * gam * e * (1 - e) / lam + xi * gam * gam * (1 - e) * (1 - e) / (2 * lam);
  CHECK(std::abs(m1 - mean) < 4 * std::sqrt(ref_var / k));
  CHECK(var == doctest::Approx(ref_var).epsilon(0.03));
}

TEST_CASE("simulation is deterministic and honors the observation model") {
  SimConfig cfg;
  cfg.T = 20;
  cfg.h = 1;
  cfg.sim_substeps = 50;
  cfg.x0 = Eigen::VectorXd::Constant(1, 0.3);
  cfg.seed = 11;
  const models::Ou ou{1.0, 0.0, 1.0};
  const auto a = simulate(ou, GaussianAdditive{{0}, 0.1}, cfg);
  const auto b = simulate(ou, GaussianAdditive{{0}, 0.1}, cfg);
  REQUIRE(a.path.size() == 20 * 50 + 1);
  for (std::size_t i = 0; i < a.path.size(); ++i) CHECK(a.path[i][0] == b.path[i][0]);
  for (std::size_t k = 0; k < a.observations.size(); ++k) {
    CHECK(a.observations.values[k][0] == b.observations.values[k][0]);
    CHECK(a.observations.times[k] == static_cast<double>(k + 1));
  }
  cfg.seed = 12;
  CHECK(simulate(ou, GaussianAdditive{{0}, 0.1}, cfg).path.back()[0] != a.path.back()[0]);

  cfg.x0[0] = 2.0;
  const auto still = simulate(models::Ou{1.0, 2.0, 0.0}, GaussianAdditive{{0}, 0.1}, cfg);
  for (const auto& x : still.path) CHECK(x[0] == 2.0);
}

TEST_CASE("Poisson predator-prey simulation") {
  SimConfig cfg;
  cfg.T = 400;
  cfg.h = 1;
  cfg.sim_substeps = 100;
  cfg.x0 = Eigen::Vector2d(1.0 / 6.0, 5.0 / 12.0);
  cfg.seed = 5;
  const models::Rma rma;
  const auto sim = simulate(models::LogState<models::Rma>{rma}, PoissonScaled{0, 8.0}, cfg);
  double resid = 0.0, var = 0.0;
  for (std::size_t k = 0; k < sim.observations.size(); ++k) {
    const double y = sim.observations.values[k][0];
    CHECK(y >= 0.0);
    CHECK(y == std::floor(y));
    const double n = sim.path[(k + 1) * 100][0];
    resid += y - 8 * n;
    var += 8 * n;
  }
  CHECK(std::abs(resid) <= 4 * std::sqrt(var));
}

TEST_CASE("CIR simulation splits steps that would leave the domain") {
  SimConfig cfg;
  cfg.T = 200;
  cfg.h = 1;
  cfg.sim_substeps = 1;
  cfg.x0 = Eigen::VectorXd::Constant(1, 0.05);
  cfg.seed = 9;
  // Feller condition holds, so splitting always succeeds eventually.
  const auto sim = simulate(models::Cir{1.0, 0.3, 0.7}, GaussianAdditive{{0}, 0.01}, cfg);
  CHECK(sim.halved_steps > 0);
  for (const auto& x : sim.path) CHECK(x[0] > 0.0);
}

TEST_CASE("long-run OU moments match the stationary law") {
  SimConfig cfg;
  cfg.T = 20000;
  cfg.h = 1;
  cfg.sim_substeps = 100;
  cfg.x0 = Eigen::VectorXd::Constant(1, 0.0);
  cfg.seed = 2024;
  const double lam = 1.0, sig = 1.0;
  const auto sim = simulate(models::Ou{lam, 0.0, sig}, GaussianAdditive{{0}, 1.0}, cfg);
  const int n = static_cast<int>(cfg.T);
  double m1 = 0, m2 = 0;
  for (int k = 1; k <= n; ++k) {
    const double x = sim.path[k * 100][0];
    m1 += x;
    m2 += x * x;
  }
  m1 /= n;
  const double var = m2 / n - m1 * m1;
  const double v = sig * sig / (2 * lam);
  const double rho = std::exp(-lam);
  // Standard errors of AR(1) sample moments.
  const double se_mean = std::sqrt(v / n * (1 + rho) / (1 - rho));
  const double se_var = v * std::sqrt(2.0 / n * (1 + rho * rho) / (1 - rho * rho));
  CHECK(std::abs(m1) <= 3 * se_mean);
  CHECK(std::abs(var - v) <= 3 * se_var);
}
