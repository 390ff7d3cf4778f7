#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace pvi {

/// Knobs for the iterative paths (polytope projection and support-function
/// sampling).  The harness wires these from the scenario config.
struct ConvexOptions {
  double dykstra_tol = 1e-12;
  int dykstra_cap_factor = 10;      // sweep cap = factor * dim * #halfspaces
  int hausdorff_dirs_per_dim = 256; // sampled support directions = dirs * dim
};

ConvexOptions& convex_options();

/// Bounded closed convex subset of R^m with nonempty interior.
///
/// Three representations: axis-aligned box, euclidean ball, and a bounded
/// intersection of halfspaces {x : <n_k,x> <= b_k} with a certified interior
/// point.  Projections are exact for boxes and balls and computed by Dykstra
/// alternating projection for halfspace intersections.
class ConvexSet {
 public:
  enum class Kind { Box, Ball, Halfspaces };

  static ConvexSet box(std::vector<double> lower, std::vector<double> upper);
  static ConvexSet ball(std::vector<double> center, double radius);
  /// `normals` is k x m row-major; offsets has k entries; `interior` must
  /// satisfy every inequality strictly.  Normals are renormalized to unit
  /// length.  Boundedness is certified at construction via finiteness of the
  /// support function along the +/- coordinate axes.
  static ConvexSet halfspaces(std::vector<double> normals, std::vector<double> offsets,
                              std::vector<double> interior);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }

  bool contains(std::span<const double> y, double tol = 0.0) const;
  /// Euclidean projection onto the set.
  void project(std::span<const double> y, std::span<double> out) const;
  std::vector<double> project(std::span<const double> y) const;
  /// dist(y, set) = |y - project(y)|; exact (not via Dykstra) for box/ball.
  double dist(std::span<const double> y) const;
  /// Distance from an interior point to the boundary; 0 outside the set.
  double dist_to_boundary(std::span<const double> y) const;
  /// Support function h(d) = sup_{x in set} <d,x>.
  double support(std::span<const double> dir) const;
  /// Rigorous bound on sup |x| over the set.
  double norm_bound() const { return norm_bound_; }
  /// A point strictly inside the set.
  std::vector<double> interior_point() const;

  /// Inner parallel set at distance eps.  Throws EmptyInteriorError when the
  /// result has empty interior.
  ConvexSet shrink(double eps) const;

  // representation accessors (used by exact-path algorithms)
  std::span<const double> box_lower() const { return lower_; }
  std::span<const double> box_upper() const { return upper_; }
  std::span<const double> ball_center() const { return center_; }
  double ball_radius() const { return radius_; }
  std::size_t halfspace_count() const { return offsets_.size(); }
  std::span<const double> halfspace_normal(std::size_t k) const;
  double halfspace_offset(std::size_t k) const { return offsets_[k]; }

 private:
  ConvexSet() = default;

  void project_halfspaces(std::span<const double> y, std::span<double> out) const;

  Kind kind_ = Kind::Box;
  int dim_ = 0;
  double norm_bound_ = 0.0;
  // box
  std::vector<double> lower_, upper_;
  // ball
  std::vector<double> center_;
  double radius_ = 0.0;
  // halfspaces: unit normals row-major, offsets, certified interior point
  std::vector<double> normals_, offsets_, interior_;
};

struct HausdorffResult {
  double value = 0.0;
  double error_bound = 0.0;  // 0 for exact (box/box и ball/ball) pairs
  bool exact = true;
};

/// Hausdorff distance.  Box/box and ball/ball pairs use closed forms; every
/// other pair samples the support-function gap over quasi-uniform sphere
/// directions and reports the covering-radius error bound.
HausdorffResult hausdorff_with_bound(const ConvexSet& d, const ConvexSet& g);
double hausdorff(const ConvexSet& d, const ConvexSet& g);

/// Quasi-uniform unit directions used for support sampling (exact antipodal
/// pair for m=1, uniform angles for m=2, Fibonacci sphere for m=3, seeded
/// uniform samples above).
std::vector<double> sphere_directions(int dim, std::size_t count);

}  // namespace pvi
