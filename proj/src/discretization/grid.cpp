#include "sdelap/discretization/grid.hpp"

#include <cmath>

#include "sdelap/error.hpp"

namespace sdelap {

TimeGrid build_grid(std::span<const double> anchor_times, int substeps) {
  if (substeps < 1) throw Error(ErrorKind::InvalidGrid, "substeps must be >= 1");
  if (anchor_times.empty()) throw Error(ErrorKind::InvalidGrid, "no anchor times");
  for (std::size_t k = 0; k < anchor_times.size(); ++k) {
    if (!std::isfinite(anchor_times[k])) throw Error(ErrorKind::InvalidGrid, "non-finite time");
    if (k > 0 && !(anchor_times[k] > anchor_times[k - 1]))
      throw Error(ErrorKind::InvalidGrid, "times must be strictly increasing");
  }
  TimeGrid grid;
  grid.times.reserve((anchor_times.size() - 1) * substeps + 1);
  grid.obs_index.reserve(anchor_times.size());
  grid.times.push_back(anchor_times[0]);
  grid.obs_index.push_back(0);
  for (std::size_t k = 1; k < anchor_times.size(); ++k) {
    const double a = anchor_times[k - 1];
    const double b = anchor_times[k];
    for (int j = 1; j < substeps; ++j)
      grid.times.push_back(a + (b - a) * (static_cast<double>(j) / substeps));
    grid.times.push_back(b);
    grid.obs_index.push_back(static_cast<int>(grid.times.size()) - 1);
  }
  return grid;
}

TimeGrid bridge_grid(double s, double t, int steps) {
  const double anchors[] = {s, t};
  return build_grid(anchors, steps);
}

}  // namespace sdelap
