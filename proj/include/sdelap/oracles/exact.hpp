#pragma once

// Closed-form transition densities used as ground truth.

namespace sdelap::oracles {

/// Gaussian: mean mu + (x - mu) e^{-lambda dt}, variance sigma^2 (1 - e^{-2 lambda dt}) / (2 lambda).
double ou_exact_logpdf(double lambda, double mu, double sigma, double x, double y, double dt);

/// Log-normal LN(log x + (r - sigma^2/2) dt, sigma^2 dt). Throws SupportViolation for x, y <= 0.
double gbm_exact_logpdf(double r, double sigma, double x, double y, double dt);

/// Scaled noncentral chi-square law of the CIR process. With
/// c = 2 lambda / (gamma^2 (1 - e^{-lambda dt})), 2 c X_dt is noncentral chi-square
/// with 4 lambda xi / gamma^2 degrees of freedom and noncentrality 2 c x e^{-lambda dt}.
/// Throws SupportViolation for x < 0 or y <= 0.
double cir_exact_logpdf(double lambda, double xi, double gamma, double x, double y, double dt);

/// Stationary Gamma(2 lambda xi / gamma^2, rate 2 lambda / gamma^2) log-density.
double cir_stationary_logpdf(double lambda, double xi, double gamma, double y);

/// log I_nu(z) for nu > -1, z >= 0, by a log-space power series.
double log_bessel_i(double nu, double z);

}  // namespace sdelap::oracles
