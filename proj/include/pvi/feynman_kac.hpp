#pragma once

#include <cstdint>
#include <vector>

#include "pvi/fields.hpp"
#include "pvi/scenario.hpp"

namespace pvi {

struct FKOptions {
  std::size_t n_paths = 100000;
  double dt = 1e-3;
  double c_disc = 0.5;  // discretization constant in the acceptance band
  std::uint64_t seed = 1;
};

/// One component of a Feynman-Kac cross-check at a grid node.
struct FKEstimate {
  int component = 0;
  int time_step = 0;
  std::size_t node = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double grid_value = 0.0;
  double band = 0.0;  // 3 SE + c_disc (h + dt_mc)
  bool pass = false;
  std::size_t n_paths = 0;
};

/// Monte Carlo estimate of u_n at node (time_step, node): average over
/// killed diffusion paths of the terminal data plus the running cost
/// (driver + penalty density), everything interpolated multilinearly in
/// space and piecewise-constant in time from the grid fields.  Boundary
/// exits contribute zero terminal value.  Throws InsufficientPathsError when
/// the standard error exceeds 10% of the solution scale.
std::vector<FKEstimate> feynman_kac_check(const ScenarioSpec& s, const SolutionField& u,
                                          const ReactionMeasureField& mu, int time_step,
                                          std::size_t node, const FKOptions& opt);

/// Multilinear interpolation of a slice field at a physical point.
void interpolate_slice(const SpatialGrid& grid, std::span<const double> slice, int m,
                       std::span<const double> x, std::span<double> out);

}  // namespace pvi
