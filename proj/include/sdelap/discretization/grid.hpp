#pragma once

#include <span>
#include <vector>

namespace sdelap {

/// Computational time grid: anchor (observation) times with uniformly
/// inserted intermediate points.
struct TimeGrid {
  std::vector<double> times;
  /// Grid index of the k-th anchor time.
  std::vector<int> obs_index;

  int node_count() const { return static_cast<int>(times.size()); }
  int step_count() const { return node_count() - 1; }
  /// Length of step i, i.e. times[i] - times[i-1], for i >= 1.
  double step(int i) const { return times[i] - times[i - 1]; }
};

/// Subdivides each interval between consecutive anchor times into `substeps`
/// equal steps. Anchor times are copied exactly.
/// Throws InvalidGrid unless times are finite and strictly increasing and substeps >= 1.
TimeGrid build_grid(std::span<const double> anchor_times, int substeps);

/// Grid on [s, t] with `steps` equal steps.
TimeGrid bridge_grid(double s, double t, int steps);

}  // namespace sdelap
