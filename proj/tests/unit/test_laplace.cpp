#include <cmath>

#include "doctest.h"
#include "sdelap/inference/transition.hpp"
#include "sdelap/model/builtin.hpp"
#include "sdelap/model/log_state.hpp"
#include "sdelap/oracles/exact.hpp"

using namespace sdelap;
using models::Cir;
using models::Gbm;
using models::Ou;

namespace {
Eigen::VectorXd e1(double x) { return Eigen::VectorXd::Constant(1, x); }

TransitionQuery query(Formulation f, double x, double y, double t, int substeps) {
  TransitionQuery q;
  q.formulation = f;
  q.t = t;
  q.x = e1(x);
  q.y = e1(y);
  q.substeps = substeps;
  q.options.mollifier_eps = 1e-6;
  return q;
}

/// Endpoint law of the linear chain x_i = F x_{i-1} + c + N(0, Q) after m steps.
double chain_endpoint_logpdf(double F, double c, double Q, double x, double y, int m) {
  double mean = x, var = 0.0;
  for (int i = 0; i < m; ++i) {
    mean = F * mean + c;
    var = F * F * var + Q;
  }
  return -0.5 * (y - mean) * (y - mean) / var - 0.5 * std::log(2 * M_PI * var);
}

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
}  // namespace

TEST_CASE("random-walk bridge is exact") {
  for (int m : {1, 2, 7}) {
    const double lp = transition_density(Walk{}, query(Formulation::X, 0.0, 0.8, 1.0, m));
    CHECK(lp == doctest::Approx(-0.32 - 0.5 * std::log(2 * M_PI)).epsilon(1e-12));
  }
}

TEST_CASE("Ornstein-Uhlenbeck bridges reproduce their discrete chains") {
  const double lam = 1.5, mu = 0.4, sig = 0.7, T = 1.3;
  const int m = 10;
  const double h = T / m;
  const Ou ou{lam, mu, sig};
  const double x = -0.3, y = 0.9;

  const double em = chain_endpoint_logpdf(1 - lam * h, lam * mu * h, sig * sig * h, x, y, m);
  CHECK(transition_density(ou, query(Formulation::X, x, y, T, m)) == doctest::Approx(em).epsilon(1e-10));
  CHECK(transition_density(ou, query(Formulation::NaiveEm, x, y, T, m)) == doctest::Approx(em).epsilon(1e-10));
  CHECK(transition_density(ou, query(Formulation::DB, x, y, T, m)) == doctest::Approx(em).epsilon(1e-9));

  const double k = 1 + 0.5 * lam * h;
  const double trap = chain_endpoint_logpdf((1 - 0.5 * lam * h) / k, lam * h * mu / k, sig * sig * h / (k * k), x, y, m);
  CHECK(transition_density(ou, query(Formulation::S, x, y, T, m)) == doctest::Approx(trap).epsilon(1e-10));

  // XDB integrates an extra N(0, eps^2 h) per step on top of the EM chain.
  auto q = query(Formulation::XDB, x, y, T, m);
  q.options.tiny_eps = 1e-2;
  const double xdb = chain_endpoint_logpdf(1 - lam * h, lam * mu * h, sig * sig * h + 1e-4 * h, x, y, m);
  CHECK(transition_density(ou, q) == doctest::Approx(xdb).epsilon(1e-10));
  q.options.tiny_eps = 1e-4;
  CHECK(std::abs(transition_density(ou, q) - em) < 1e-6);

  const double exact = oracles::ou_exact_logpdf(lam, mu, sig, x, y, T);
  CHECK(transition_density(ou, query(Formulation::NaiveExact, x, y, T, m)) == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("DB agrees with X on nonlinear models") {
  const Gbm gbm{0.6, 0.5};
  for (double y : {0.7, 1.0, 1.6}) {
    const double x_lp = transition_density(gbm, query(Formulation::X, 1.0, y, 1.0, 16));
    const double db_lp = transition_density(gbm, query(Formulation::DB, 1.0, y, 1.0, 16));
    CHECK(std::abs(x_lp - db_lp) <= 1e-8);
  }
  const Cir cir{1.0, 1.0, 0.5};
  for (double y : {0.6, 1.3}) {
    const double x_lp = transition_density(cir, query(Formulation::X, 1.0, y, 0.5, 12));
    const double db_lp = transition_density(cir, query(Formulation::DB, 1.0, y, 0.5, 12));
    CHECK(std::abs(x_lp - db_lp) <= 1e-8);
  }
}

TEST_CASE("S converges to the GBM density, X stays close and the naive product is biased") {
  const Gbm gbm{1.0, 1.0};
  const double x = 1.0, y = 1.5, T = 1.0;
  const double exact = oracles::gbm_exact_logpdf(1.0, 1.0, x, y, T);
  const double err_x8 = std::abs(transition_density(gbm, query(Formulation::X, x, y, T, 8)) - exact);
  const double err_x64 = std::abs(transition_density(gbm, query(Formulation::X, x, y, T, 64)) - exact);
  const double err_s64 = std::abs(transition_density(gbm, query(Formulation::S, x, y, T, 64)) - exact);
  const double err_n8 = std::abs(transition_density(gbm, query(Formulation::NaiveEm, x, y, T, 8)) - exact);
  MESSAGE("GBM errors: X8 " << err_x8 << " X64 " << err_x64 << " S64 " << err_s64 << " naive8 " << err_n8);
  // X and S have different limits; only S is exact here.
  CHECK(err_x64 < 0.2);
  CHECK(err_s64 < 1e-3);
  CHECK(err_n8 > 4 * err_x8);
  // On finer grids the naive product loses its interior mode altogether.
  CHECK_THROWS_AS(transition_density(gbm, query(Formulation::NaiveEm, x, y, T, 64)), Error);
}

TEST_CASE("log-state transition includes the endpoint Jacobian") {
  const Gbm gbm{0.3, 0.6};
  const models::LogState<Gbm> lg{gbm};
  const double exact = oracles::gbm_exact_logpdf(0.3, 0.6, 1.0, 1.4, 0.8);
  // Log-GBM is a Brownian motion with drift, so X is exact for any grid.
  CHECK(transition_density(lg, query(Formulation::X, 1.0, 1.4, 0.8, 5)) == doctest::Approx(exact).epsilon(1e-10));
  CHECK(transition_density(lg, query(Formulation::NaiveExact, 1.0, 1.4, 0.8, 5)) ==
        doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("Newton converges in one step on a quadratic") {
  const Ou ou{1.0, 0.0, 1.0};
  const auto problem = bridge_problem(ou, query(Formulation::X, 0.0, 1.0, 1.0, 6));
  const auto mode = find_mode(problem, init_path(problem, {}, Vec<double, 1>::Zero()), NewtonConfig{});
  CHECK(mode.converged);
  CHECK(mode.iters <= 2);
  CHECK(mode.grad_norm <= 1e-8);
}

TEST_CASE("Newton reports non-convergence") {
  const Gbm gbm{1.0, 1.0};
  const auto problem = bridge_problem(gbm, query(Formulation::X, 1.0, 3.0, 1.0, 6));
  NewtonConfig cfg;
  cfg.max_iters = 0;
  try {
    find_mode(problem, init_path(problem, {}, Vec<double, 1>::Ones()), cfg);
    FAIL("expected NoConvergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoConvergence);
  }
}

TEST_CASE("transition endpoints outside the state space") {
  const Gbm gbm{1.0, 1.0};
  try {
    transition_density(gbm, query(Formulation::X, 1.0, -0.5, 1.0, 4));
    FAIL("expected SupportViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SupportViolation);
  }
  const auto sweep = density_sweep(gbm, query(Formulation::X, 1.0, 1.0, 1.0, 4), {0.5, -1.0, 2.0}, {}, 2);
  CHECK(sweep[0].error.empty());
  CHECK_FALSE(sweep[1].error.empty());
  CHECK(std::isnan(sweep[1].logp));
  CHECK(sweep[2].logp == doctest::Approx(transition_density(gbm, query(Formulation::X, 1.0, 2.0, 1.0, 4))));
}

namespace {
/// Mode path of a bridge problem in natural coordinates, endpoints included.
template <typename M>
std::vector<double> mode_path(const M& m, Formulation f, double x, double y, double t, int steps) {
  const auto problem = bridge_problem(m, query(f, x, y, t, steps));
  const auto mode = find_mode(problem, init_path(problem, {}, Vec<double, M::dim>::Ones()), NewtonConfig{});
  std::vector<double> out;
  for (const auto& s : problem.states(mode.z)) out.push_back(s[0]);
  return out;
}
}  // namespace

TEST_CASE("naive GBM bridge mode sinks below the line as the grid refines") {
  const Gbm gbm{1.0, 1.0};
  const auto p8 = mode_path(gbm, Formulation::NaiveEm, 1.0, 1.0, 1.0, 8);
  const auto p16 = mode_path(gbm, Formulation::NaiveEm, 1.0, 1.0, 1.0, 16);
  CHECK(p8[4] < 1.0);
  CHECK(p16[8] < p8[4]);
}

TEST_CASE("X bridge mode has a stable limit") {
  const Gbm gbm{1.0, 1.0};
  const auto p32 = mode_path(gbm, Formulation::X, 1.0, 1.0, 1.0, 32);
  const auto p64 = mode_path(gbm, Formulation::X, 1.0, 1.0, 1.0, 64);
  const auto p128 = mode_path(gbm, Formulation::X, 1.0, 1.0, 1.0, 128);
  const double d1 = std::abs(p32[16] - p64[32]);
  const double d2 = std::abs(p64[32] - p128[64]);
  MESSAGE("X midpoints " << p32[16] << " " << p64[32] << " " << p128[64]);
  CHECK(d1 < 0.02);
  CHECK(d2 <= d1 + 1e-12);
  CHECK(std::abs(p128[64] - 1.0) < 0.02);
}

TEST_CASE("CIR bridge modes: tight gradient and stability under refinement") {
  const Cir cir{1.0, 1.0, 0.5};
  for (Formulation f : {Formulation::X, Formulation::S}) {
    CAPTURE(to_string(f));
    const auto problem = bridge_problem(cir, query(f, 0.5, 1.0, 1.0, 64));
    const auto mode = find_mode(problem, init_path(problem, {}, Vec<double, 1>::Ones()), NewtonConfig{});
    CHECK(mode.grad_norm <= 1e-8);
    CHECK(linalg::BlockCholesky::try_factor(mode.hessian).has_value());
    const auto coarse = mode_path(cir, f, 0.5, 1.0, 1.0, 32);
    const auto fine = mode_path(cir, f, 0.5, 1.0, 1.0, 64);
    double sup = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) sup = std::max(sup, std::abs(coarse[i] - fine[2 * i]));
    CHECK(sup <= 1.0 / 32);
  }
}

TEST_CASE("init_path interpolates pinned endpoints") {
  const Ou ou{1, 0, 1};
  {
    const auto p = bridge_problem(ou, query(Formulation::X, 1.0, 1.0, 1.0, 4));
    const auto xs = p.states(init_path(p, {}, Vec<double, 1>::Zero()));
    for (const auto& x : xs) CHECK(x[0] == 1.0);
  }
  {
    const auto p = bridge_problem(ou, query(Formulation::X, 0.0, 1.0, 1.0, 2));
    const auto xs = p.states(init_path(p, {}, Vec<double, 1>::Zero()));
    CHECK(xs[0][0] == 0.0);
    CHECK(xs[1][0] == 0.5);
    CHECK(xs[2][0] == 1.0);
  }
}

TEST_CASE("Laplace is exact for a Gaussian integrand") {
  // One free node between two pinned ones; the integral is a convolution of Gaussians.
  const auto lp = transition_laplace(Walk{}, query(Formulation::X, 0.0, 0.0, 2.0, 2));
  CHECK(lp.latent_dim == 1);
  CHECK(lp.log_integral == doctest::Approx(-0.5 * std::log(2 * M_PI * 2.0)).epsilon(1e-14));
}
