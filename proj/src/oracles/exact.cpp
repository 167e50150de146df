#include "sdelap/oracles/exact.hpp"

#include <cmath>
#include <limits>

#include "sdelap/error.hpp"

namespace sdelap::oracles {

double ou_exact_logpdf(double lambda, double mu, double sigma, double x, double y, double dt) {
  const double decay = std::exp(-lambda * dt);
  const double var = sigma * sigma * -std::expm1(-2.0 * lambda * dt) / (2.0 * lambda);
  const double r = y - (mu + (x - mu) * decay);
  return -0.5 * r * r / var - 0.5 * std::log(2.0 * M_PI * var);
}

double gbm_exact_logpdf(double r, double sigma, double x, double y, double dt) {
  if (!(x > 0.0) || !(y > 0.0)) throw Error(ErrorKind::SupportViolation, "GBM density needs x, y > 0");
  const double var = sigma * sigma * dt;
  const double z = std::log(y) - std::log(x) - (r - 0.5 * sigma * sigma) * dt;
  return -0.5 * z * z / var - 0.5 * std::log(2.0 * M_PI * var) - std::log(y);
}

double log_bessel_i(double nu, double z) {
  if (!(nu > -1.0) || !(z >= 0.0)) throw Error(ErrorKind::InvalidArgument, "log_bessel_i needs nu > -1, z >= 0");
  if (z == 0.0) return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  // term_k = (z/2)^{2k+nu} / (k! Gamma(k+nu+1)); summed relative to the largest term.
  const double lh = std::log(0.5 * z);
  auto log_term = [&](double k) { return (2.0 * k + nu) * lh - std::lgamma(k + 1.0) - std::lgamma(k + nu + 1.0); };
  const double q = 0.25 * z * z;
  const double peak = std::max(0.0, std::floor(0.5 * (-(nu + 2.0) + std::sqrt(nu * nu + 4.0 * q))));
  const double lmax = log_term(peak);
  double sum = 1.0;
  double t = 1.0;
  for (double k = peak; t > 1e-18 * sum; k += 1.0) {
    t *= q / ((k + 1.0) * (k + nu + 1.0));
    sum += t;
  }
  t = 1.0;
  for (double k = peak; k > 0.0 && t > 1e-18 * sum; k -= 1.0) {
    t *= k * (k + nu) / q;
    sum += t;
  }
  return lmax + std::log(sum);
}

double cir_exact_logpdf(double lambda, double xi, double gamma, double x, double y, double dt) {
  if (!(x >= 0.0) || !(y > 0.0)) throw Error(ErrorKind::SupportViolation, "CIR density needs x >= 0, y > 0");
  const double g2 = gamma * gamma;
  const double c = 2.0 * lambda / (g2 * -std::expm1(-lambda * dt));
  const double q = 2.0 * lambda * xi / g2 - 1.0;
  const double u = c * x * std::exp(-lambda * dt);
  const double v = c * y;
  if (u == 0.0)  // Gamma(q+1, rate c)
    return (q + 1.0) * std::log(c) + q * std::log(y) - v - std::lgamma(q + 1.0);
  return std::log(c) - u - v + 0.5 * q * std::log(v / u) + log_bessel_i(q, 2.0 * std::sqrt(u * v));
}

double cir_stationary_logpdf(double lambda, double xi, double gamma, double y) {
  if (!(y > 0.0)) throw Error(ErrorKind::SupportViolation, "CIR density needs y > 0");
  const double shape = 2.0 * lambda * xi / (gamma * gamma);
  const double rate = 2.0 * lambda / (gamma * gamma);
  return shape * std::log(rate) + (shape - 1.0) * std::log(y) - rate * y - std::lgamma(shape);
}

}  // namespace sdelap::oracles
