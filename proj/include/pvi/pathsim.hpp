#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pvi/coefficient.hpp"
#include "pvi/grid.hpp"

namespace pvi {

struct PathRecord {
  double exit_time = 0.0;
  bool boundary_exit = false;            // false = survived to the horizon
  std::array<double, 2> exit_pos{0, 0};  // first point outside E, or X_T
};

/// Euler-Maruyama batch of the diffusion dX = sigma(t,X) dB started at
/// (start_time, start), killed at the first step leaving E or at the
/// horizon.  Fully determined by the seed: path j uses an independent
/// stream derived from (seed, j), so the batch is identical no matter how
/// the paths are scheduled.
struct PathBatch {
  double start_time = 0.0;
  std::array<double, 2> start{0, 0};
  double dt = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::vector<PathRecord> paths;
  /// Flattened trajectories (dim doubles per step, including the start and
  /// the exit point); filled only on request.
  std::vector<std::vector<double>> trajectories;

  struct Stats {
    double mean = 0.0;
    double std_error = 0.0;
  };
  Stats exit_time_stats() const;
  double boundary_exit_fraction() const;
};

PathBatch simulate_paths(const SpatialGrid& grid, const CoefficientField& coeff,
                         double start_time, std::array<double, 2> start, double horizon,
                         std::size_t n_paths, double dt, std::uint64_t seed,
                         bool store_trajectories = false);

/// Serial reference implementation; bitwise identical to the parallel one.
PathBatch simulate_paths_serial(const SpatialGrid& grid, const CoefficientField& coeff,
                                double start_time, std::array<double, 2> start, double horizon,
                                std::size_t n_paths, double dt, std::uint64_t seed,
                                bool store_trajectories = false);

}  // namespace pvi
