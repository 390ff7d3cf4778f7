#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pvi/scenario.hpp"

namespace pvi {

struct McConfig {
  bool enabled = false;
  std::size_t n_paths = 100000;
  double dt = 1e-3;
  double c_disc = 0.5;
  int nodes = 20;                                  // target check-node count
  std::vector<double> time_fractions = {0.25, 0.5};  // start times as fractions of T
};

/// Flat, strictly-parsed description of a scenario plus every solver knob.
/// parse_config materializes all defaults, so a serialized config is fully
/// self-contained and its hash pins the run.
struct ScenarioConfig {
  // [scenario]
  std::string name = "unnamed";
  int dimension = 1;
  int components = 1;
  std::uint64_t seed = 1;
  // [domain]
  double extent_x = 1.0;
  double extent_y = 1.0;
  // [grid]
  int nodes_x = 33;
  int nodes_y = 9;
  // [time]
  double horizon = 1.0;
  int steps = 64;
  // [coefficient]
  std::string coefficient_kind = "constant";  // constant|piecewise|rotating_anisotropy
  double lambda = 1.0;
  double value = 1.0;
  double value_xx = 1.0;
  double value_xy = 0.0;
  double value_yy = 1.0;
  double piecewise_left = 1.0;
  double piecewise_right = 1.0;
  double piecewise_split = 0.5;
  double rot_kappa = 0.5;
  double rot_omega = 3.141592653589793;
  // [driver]
  std::string driver_kind = "zero";  // zero|linear_coupling|clipped_nonlinear
  std::vector<double> coupling;      // row-major m x m
  double driver_kappa = 0.0;
  double driver_gamma = 0.0;
  // [terminal]
  std::string terminal_kind = "zero";  // zero|sine|sine_sum
  double amplitude = 0.0;
  int mode = 1;
  double amplitude2 = 0.0;
  int mode2 = 1;
  int component = 0;
  // [obstacle]
  std::string obstacle_kind = "static_ball";
  double radius = 1.0;       // static_ball
  double radius0 = 1.0;      // growing_ball
  double rate = 1.0;         // growing_ball / moving_box time rate
  double lower_a = 0.0;      // lower_box: lower = (a + b t) bump(x) + c, upper const
  double lower_b = 0.0;
  double lower_c = 0.0;
  double lower_upper = 1.0;
  double lower_base = -1.0;  // moving_box bounds
  double lower_amp = 0.0;
  double upper_base = 1.0;
  double upper_amp = 0.0;
  std::vector<double> hs_normals;   // halfspace_intersection, row-major k x m
  std::vector<double> hs_offsets;
  std::vector<double> hs_interior;
  double uniform_radius = 0.0;  // 0 = derive from the obstacle kind
  // [witness]
  std::string witness_kind = "none";  // none|zero|sine|box_midpoint|stationary_profile
  double epsilon = 0.0;
  double witness_amplitude = 0.0;
  int witness_component = 0;
  double witness_scale = 1.0;
  double inner_amp = 0.0;
  double inner_mod = 0.0;
  // [anchor]
  bool has_anchor = false;
  std::vector<double> anchor;
  // [ladder]
  std::vector<double> ladder = {16, 64, 256, 1024, 4096};
  double single_n = 0.0;  // penalty level for `solve`; 0 = last ladder value
  // [solver] / [tolerances] / [linear]
  SolverTolerances tol;
  // [convex]
  ConvexOptions convex;
  // [mc]
  McConfig mc;

  /// Canonical text with every key explicit; stable across platforms.
  std::string serialize() const;
  /// FNV-1a hash of serialize().
  std::uint64_t hash() const;
  /// Build the scenario model (validates it).
  ScenarioSpec to_spec() const;
  double effective_single_n() const { return single_n > 0.0 ? single_n : ladder.back(); }
};

/// Parse a config file; `builtin:<name>` resolves to the embedded library.
/// Throws ParseError for syntax problems and ValidationError for unknown
/// keys, missing keys, or semantic failures.
ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text);

const std::vector<std::string>& builtin_scenario_names();
std::string builtin_config_text(const std::string& name);

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len);
inline std::uint64_t fnv1a_init() { return 1469598103934665603ull; }

}  // namespace pvi
