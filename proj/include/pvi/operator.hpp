#pragma once

#include <span>

#include "pvi/coefficient.hpp"
#include "pvi/grid.hpp"
#include "pvi/kernels.hpp"

namespace pvi {

/// Finite-difference discretization of the divergence-form operator
///   L u = 1/2 sum_ij d_j(a_ij d_i u)
/// on the interior nodes of a tensor grid with zero Dirichlet boundary.
///
/// 1d uses harmonic averaging of the coefficient at cell faces.  2d uses
/// arithmetic face averages for the axis terms; the mixed term is split into
/// two-point fluxes along the grid diagonals, which keeps the assembled
/// matrix exactly symmetric and annihilates constants on full stencils.
class DiscreteOperator {
 public:
  static DiscreteOperator assemble(const CoefficientField& coeff, const SpatialGrid& grid,
                                   double t);

  const Csr& matrix() const { return mat_; }
  const SpatialGrid& grid() const { return *grid_; }
  double time() const { return t_; }

  /// y = A x on packed interior vectors (one component).
  void apply(std::span<const double> x, std::span<double> y) const;

  /// Discrete energy pairing -cell_volume * x^T A y of one component; equals
  /// the bilinear form 1/2 int a grad(x) grad(y) up to discretization error.
  double energy_pairing(std::span<const double> x, std::span<const double> y) const;

  bool tridiagonal() const { return grid_->dim() == 1; }
  /// Extract bands for the 1d direct solver (sizes = interior count).
  void bands(std::span<double> sub, std::span<double> diag, std::span<double> sup) const;

 private:
  const SpatialGrid* grid_ = nullptr;
  double t_ = 0.0;
  Csr mat_;
};

}  // namespace pvi
