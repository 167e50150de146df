#pragma once

#include <cstdint>
#include <random>

namespace sdelap::oracles {

/// Stream identifiers so that independent uses of one seed never share draws.
enum class Stream : std::uint64_t { Path = 1, Observations = 2, Test = 3 };

/// Reproducible random numbers: std::mt19937_64 (fully specified by the C++
/// standard) seeded through std::seed_seq{seed, stream}, with the variate
/// transforms implemented here, because the standard library distributions
/// are implementation-defined.
class Rng {
 public:
  Rng(std::uint64_t seed, Stream stream);

  /// Uniform on (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Box-Muller, both variates used).
  double normal();
  /// Poisson: sequential inversion for mean < 30, PTRS rejection otherwise.
  std::int64_t poisson(double mean);
  /// Gamma(shape, 1), Marsaglia-Tsang.
  double gamma(double shape);
  /// Noncentral chi-square as a Poisson mixture of central chi-squares.
  double noncentral_chi_squared(double df, double noncentrality);

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Draw from the exact CIR transition law (test-only validation sampler).
double cir_exact_sample(double lambda, double xi, double gamma, double x, double dt, Rng& rng);

}  // namespace sdelap::oracles
