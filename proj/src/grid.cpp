#include "pvi/grid.hpp"

#include "pvi/errors.hpp"

namespace pvi {

SpatialGrid SpatialGrid::line(double extent_x, std::size_t nx) {
  if (!(extent_x > 0.0)) throw ValidationError("domain extent must be positive", "extent_x");
  if (nx < 3) throw ValidationError("need at least one interior node", "nodes_x");
  SpatialGrid g;
  g.dim_ = 1;
  g.n_ = {nx, 1};
  g.extent_ = {extent_x, 0.0};
  g.h_ = {extent_x / static_cast<double>(nx - 1), 0.0};
  g.build_maps();
  return g;
}

SpatialGrid SpatialGrid::rectangle(double extent_x, double extent_y, std::size_t nx,
                                   std::size_t ny) {
  if (!(extent_x > 0.0)) throw ValidationError("domain extent must be positive", "extent_x");
  if (!(extent_y > 0.0)) throw ValidationError("domain extent must be positive", "extent_y");
  if (nx < 3 || ny < 3) throw ValidationError("need at least one interior node", "nodes");
  SpatialGrid g;
  g.dim_ = 2;
  g.n_ = {nx, ny};
  g.extent_ = {extent_x, extent_y};
  g.h_ = {extent_x / static_cast<double>(nx - 1), extent_y / static_cast<double>(ny - 1)};
  g.build_maps();
  return g;
}

void SpatialGrid::build_maps() {
  const std::size_t total = nodes();
  boundary_.assign(total, false);
  node_to_interior_.assign(total, -1);
  interior_to_node_.clear();
  for (std::size_t node = 0; node < total; ++node) {
    const std::size_t ix = node_ix(node);
    const std::size_t iy = node_iy(node);
    bool bnd = ix == 0 || ix == n_[0] - 1;
    if (dim_ == 2) bnd = bnd || iy == 0 || iy == n_[1] - 1;
    boundary_[node] = bnd;
    if (!bnd) {
      node_to_interior_[node] = static_cast<int>(interior_to_node_.size());
      interior_to_node_.push_back(node);
    }
  }
}

double SpatialGrid::trapezoid_weight(std::size_t node) const {
  const std::size_t ix = node_ix(node);
  double w = (ix == 0 || ix == n_[0] - 1) ? 0.5 : 1.0;
  if (dim_ == 2) {
    const std::size_t iy = node_iy(node);
    w *= (iy == 0 || iy == n_[1] - 1) ? 0.5 : 1.0;
  }
  return w;
}

bool SpatialGrid::point_inside(std::span<const double> x) const {
  for (int a = 0; a < dim_; ++a) {
    if (!(x[a] > 0.0 && x[a] < extent_[a])) return false;
  }
  return true;
}

}  // namespace pvi
