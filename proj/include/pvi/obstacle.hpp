#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pvi/coefficient.hpp"
#include "pvi/convex_set.hpp"
#include "pvi/fields.hpp"
#include "pvi/grid.hpp"

namespace pvi {

/// The obstacle sets of one time level, one per interior node.  Families that
/// do not vary in space share a single set.
class ObstacleSlice {
 public:
  ObstacleSlice(std::vector<ConvexSet> sets, bool shared)
      : sets_(std::move(sets)), shared_(shared) {}

  const ConvexSet& at(std::size_t interior_index) const {
    return shared_ ? sets_[0] : sets_[interior_index];
  }
  bool shared() const { return shared_; }

 private:
  std::vector<ConvexSet> sets_;
  bool shared_;
};

/// Map (t,x) -> D(t,x), a bounded closed convex set per space-time point,
/// uniformly contained in the ball of radius `uniform_radius` around 0.
class ObstacleFamily {
 public:
  using Evaluator = std::function<ConvexSet(double t, std::span<const double> x)>;

  ObstacleFamily() = default;
  ObstacleFamily(Evaluator eval, double uniform_radius, bool space_homogeneous)
      : eval_(std::move(eval)),
        radius_(uniform_radius),
        space_homogeneous_(space_homogeneous) {}

  ConvexSet at(double t, std::span<const double> x) const { return eval_(t, x); }
  double uniform_radius() const { return radius_; }
  bool space_homogeneous() const { return space_homogeneous_; }

  /// Materialize the sets of one time level over the interior nodes.
  ObstacleSlice slice(double t, const SpatialGrid& grid) const;

 private:
  Evaluator eval_;
  double radius_ = 0.0;
  bool space_homogeneous_ = true;
};

/// Pointwise projection of an m-vector field onto the slice obstacles plus
/// the penalty density -n (y - proj(y)).  `values` is interior-packed,
/// node-major, component fastest; outputs have the same layout and may alias
/// nothing.  The parallel version splits nodes across threads.
void penalty_sweep(const ObstacleSlice& slice, std::span<const double> values, int m,
                   double penalty, std::span<double> proj, std::span<double> density);
void penalty_sweep_serial(const ObstacleSlice& slice, std::span<const double> values, int m,
                          double penalty, std::span<double> proj, std::span<double> density);

/// Grid-level continuity and uniform-bound report for an obstacle family.
struct ContinuityReport {
  double max_adjacent_rho = 0.0;   // max Hausdorff distance between grid-adjacent sets
  double max_time_rho = 0.0;       // the time-direction part of the modulus
  double max_space_rho = 0.0;      // the space-direction part
  double worst_radius = 0.0;       // largest observed containment radius
  bool uniform_bound_ok = true;
};

/// Walk all grid-adjacent (time and space) pairs and record the Hausdorff
/// modulus; check every set against the declared uniform radius.  Throws
/// UniformBoundViolatedError when a set escapes the bounding ball.
ContinuityReport validate_continuity(const ObstacleFamily& family, const SpatialGrid& grid, double horizon,
                             int n_steps);

/// Separation witness: a grid function u* with margin eps inside D, together
/// with its terminal slice and source so the defining evolution equation can
/// be residual-checked on the grid.
struct SeparationWitness {
  double epsilon = 0.0;
  SolutionField u_star;
  std::vector<double> phi_star;          // nodes x m
  std::optional<SolutionField> f_star;   // source, same layout as u_star
};

/// Analytic witness description; materialized onto whichever grid a solve
/// ends up using (the step count can grow on retries).
struct WitnessSpec {
  using Field = std::function<void(double t, std::span<const double> x, std::span<double> out)>;
  double epsilon = 0.0;
  Field u_star;
  Field f_star;  // may be empty; then the residual check is skipped

  SeparationWitness materialize(const SpatialGrid& grid, int n_steps, double horizon,
                                int components) const;
};

struct WitnessReport {
  bool pass = true;
  double worst_margin = 0.0;       // min over nodes of dist(u*, boundary) - eps
  int violation_step = -1;
  std::size_t violation_node = 0;
  double max_pde_residual = 0.0;   // only when f_star is present
};

/// Check u*(t,x) in the eps-shrunken obstacle at every interior node and
/// time level; when f* is supplied also check the backward-Euler residual of
/// the witness equation.  Does not throw on margin violations -- callers that
/// require a valid witness use `require` below.
WitnessReport validate_separation(const ObstacleFamily& family, const SeparationWitness& witness,
                          const CoefficientField& coeff, double pde_residual_tol);

/// validate_separation that throws MarginViolatedError on failure.
WitnessReport require_separation(const ObstacleFamily& family, const SeparationWitness& witness,
                         const CoefficientField& coeff, double pde_residual_tol);

}  // namespace pvi
