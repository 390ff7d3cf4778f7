#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvi/coefficient.hpp"
#include "pvi/fields.hpp"
#include "pvi/grid.hpp"
#include "pvi/obstacle.hpp"

namespace pvi {

/// Right-hand side f(t, x, y, z) with recorded Lipschitz constants alpha (in
/// y) and beta (in z).  z is the m x d row-major matrix of sigma*grad(u^i).
class Driver {
 public:
  enum class Kind { Zero, LinearCoupling, ClippedNonlinear };

  static Driver zero(int m);
  /// f^i = sum_j c_ij y_j; c row-major m x m; alpha = ||c||_2.
  static Driver linear_coupling(int m, std::vector<double> c);
  /// f^i = kappa tanh(y_i) + gamma sum_a tanh(z_ia); alpha=|kappa|,
  /// beta=|gamma| sqrt(d).
  static Driver clipped_nonlinear(int m, int dim, double kappa, double gamma);

  Kind kind() const { return kind_; }
  int components() const { return m_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const std::vector<double>& coupling() const { return c_; }
  double kappa() const { return kappa_; }
  double gamma() const { return gamma_; }

  void eval(double t, std::span<const double> x, std::span<const double> y,
            std::span<const double> z, std::span<double> out) const;

 private:
  Kind kind_ = Kind::Zero;
  int m_ = 1;
  int dim_ = 1;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double kappa_ = 0.0;
  double gamma_ = 0.0;
  std::vector<double> c_;
};

/// Solver tolerances and iteration policy.  Every knob is exposed in the
/// scenario config.
struct SolverTolerances {
  double theta = 1.0;              // time scheme weight in [0.5, 1]
  double tol_picard = 1e-10;       // iterate-change tolerance per implicit step
  double tol_res = 1e-8;           // equation residual tolerance per step
  int picard_cap = 5000;
  int retry_halvings = 4;          // dt halvings after PicardDiverged
  double tol_feas_factor = 1e-3;   // tol_feas = factor * R_D
  double tol_min_factor = 1e-6;    // tol_min = factor * energy scale
  double tol_vi_factor = 1e-6;
  double cg_tol = 1e-10;
  int cg_cap_factor = 10;
  double witness_residual_tol = 1e-2;
};

/// Complete problem description consumed by the penalized solver.
struct ScenarioSpec {
  std::string name;
  SpatialGrid grid;
  double horizon = 1.0;
  int n_steps = 64;
  int components = 1;
  std::vector<double> phi;  // terminal data, nodes x m
  Driver driver;
  CoefficientField coefficient;
  ObstacleFamily obstacle;
  std::optional<WitnessSpec> witness;
  std::vector<double> ladder = {16, 64, 256, 1024, 4096};
  SolverTolerances tol;
  std::uint64_t seed = 1;
  /// Interior anchor for the minimality test family: a constant vector that
  /// stays inside D(t,x) everywhere, when one exists.
  std::optional<std::vector<double>> anchor;

  double dt() const { return horizon / n_steps; }
  double tol_feas() const { return tol.tol_feas_factor * obstacle.uniform_radius(); }
  double tol_min() const { return tol.tol_min_factor * energy_scale(); }
  double tol_vi() const { return tol.tol_vi_factor * energy_scale(); }

  /// ||phi||_H^2 + ||f(.,.,0,0)||^2_{L^2(0,T;H)}, floored at R_D^2 |E| (1+T)
  /// so tolerances stay meaningful for homogeneous data.
  double energy_scale() const;

  /// Check terminal containment, driver finiteness at the origin, and the
  /// declared Lipschitz constants on seeded probe pairs.  Throws
  /// ValidationError on failure.
  void validate() const;
};

/// Driver evaluation with a NaN/Inf guard; throws NonFiniteError.
void driver_eval(const ScenarioSpec& s, double t, std::span<const double> x,
                 std::span<const double> y, std::span<const double> z, std::span<double> out);

}  // namespace pvi
