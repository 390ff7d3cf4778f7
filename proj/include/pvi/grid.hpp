#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace pvi {

/// Tensor grid on a box domain (0,Lx) or (0,Lx)x(0,Ly) with zero-Dirichlet
/// boundary nodes on the edges.  Node layout is row-major with x fastest.
class SpatialGrid {
 public:
  /// 1d grid with `nx` nodes including both boundary nodes.
  static SpatialGrid line(double extent_x, std::size_t nx);
  /// 2d grid with nx * ny nodes including the boundary ring.
  static SpatialGrid rectangle(double extent_x, double extent_y, std::size_t nx, std::size_t ny);

  int dim() const { return dim_; }
  std::size_t nodes() const { return n_[0] * (dim_ == 2 ? n_[1] : 1); }
  std::size_t interior_nodes() const { return interior_to_node_.size(); }
  std::size_t nodes_x() const { return n_[0]; }
  std::size_t nodes_y() const { return dim_ == 2 ? n_[1] : 1; }
  double spacing(int axis) const { return h_[axis]; }
  double extent(int axis) const { return extent_[axis]; }
  /// Cell volume h_x (* h_y in 2d).
  double cell_volume() const { return dim_ == 2 ? h_[0] * h_[1] : h_[0]; }

  bool is_boundary(std::size_t node) const { return boundary_[node]; }
  /// Interior index of a node, or -1 for boundary nodes.
  int interior_index(std::size_t node) const { return node_to_interior_[node]; }
  std::size_t node_of_interior(std::size_t i) const { return interior_to_node_[i]; }

  std::size_t node_index(std::size_t ix, std::size_t iy = 0) const {
    return iy * n_[0] + ix;
  }
  std::size_t node_ix(std::size_t node) const { return node % n_[0]; }
  std::size_t node_iy(std::size_t node) const { return node / n_[0]; }

  /// Node coordinates (length = dim).
  std::array<double, 2> coords(std::size_t node) const {
    return {static_cast<double>(node_ix(node)) * h_[0],
            dim_ == 2 ? static_cast<double>(node_iy(node)) * h_[1] : 0.0};
  }

  /// Trapezoid quadrature weight of a node (1 interior, 1/2 per touching
  /// axis boundary); multiply by cell_volume() for the integral weight.
  double trapezoid_weight(std::size_t node) const;

  /// True if a physical point lies strictly inside the domain.
  bool point_inside(std::span<const double> x) const;

 private:
  int dim_ = 1;
  std::array<std::size_t, 2> n_{0, 0};
  std::array<double, 2> h_{0.0, 0.0};
  std::array<double, 2> extent_{0.0, 0.0};
  std::vector<bool> boundary_;
  std::vector<int> node_to_interior_;
  std::vector<std::size_t> interior_to_node_;

  void build_maps();
};

}  // namespace pvi
