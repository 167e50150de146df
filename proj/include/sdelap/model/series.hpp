#pragma once

#include <cmath>
#include <vector>

#include "sdelap/error.hpp"

namespace sdelap {

/// Observations y_k at times t_k > t0 (or t_1 == t0 for an observation at the
/// initial time). Each record has observation_width() entries; NaN = missing.
struct ObservationSeries {
  double t0 = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> values;

  std::size_t size() const { return times.size(); }

  void validate(int width) const {
    if (times.empty()) throw Error(ErrorKind::InvalidArgument, "observation series is empty");
    if (times.size() != values.size()) throw Error(ErrorKind::InvalidArgument, "times and values differ in length");
    if (!std::isfinite(t0)) throw Error(ErrorKind::InvalidArgument, "non-finite initial time");
    double prev = t0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (!std::isfinite(times[k])) throw Error(ErrorKind::InvalidArgument, "non-finite observation time");
      const bool ok = k == 0 ? times[k] >= t0 : times[k] > prev;
      if (!ok) throw Error(ErrorKind::InvalidArgument, "observation times must increase from t0");
      if (static_cast<int>(values[k].size()) != width)
        throw Error(ErrorKind::InvalidArgument, "observation record has wrong width");
      prev = times[k];
    }
  }
};

}  // namespace sdelap
