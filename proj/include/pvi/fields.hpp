#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "pvi/coefficient.hpp"
#include "pvi/grid.hpp"

namespace pvi {

/// Space-time grid function with m components: slices k = 0..n_steps at
/// t_k = k * horizon / n_steps, each slice node-major with the component
/// index fastest.  Boundary nodes hold zeros except possibly the terminal
/// slice.  Optionally carries sigma * grad(u^i) per node and component.
class SolutionField {
 public:
  SolutionField() = default;
  SolutionField(const SpatialGrid& grid, int components, int n_steps, double horizon);

  const SpatialGrid& grid() const { return grid_; }
  int components() const { return m_; }
  int steps() const { return nt_; }
  double horizon() const { return horizon_; }
  double dt() const { return horizon_ / nt_; }
  double time_of(int k) const { return dt() * k; }

  std::span<double> slice(int k) { return {u_.data() + slice_len() * k, slice_len()}; }
  std::span<const double> slice(int k) const { return {u_.data() + slice_len() * k, slice_len()}; }
  double& at(int k, std::size_t node, int comp) { return u_[slice_len() * k + node * m_ + comp]; }
  double at(int k, std::size_t node, int comp) const {
    return u_[slice_len() * k + node * m_ + comp];
  }

  bool has_gradients() const { return !sig_grad_.empty(); }
  /// sigma*grad(u^comp) entry along axis at a node.
  double sig_grad(int k, std::size_t node, int comp, int axis) const {
    const int d = grid_.dim();
    return sig_grad_[((static_cast<std::size_t>(k) * grid_.nodes() + node) * m_ + comp) * d +
                     axis];
  }
  /// Fill sigma*grad for every slice: central differences in the interior,
  /// one-sided at the boundary, then multiplied by sigma(t_k, x).
  void compute_gradients(const CoefficientField& coeff);

  /// Raw gradient of one component at a node (no sigma), same stencils.
  void raw_gradient(int k, std::size_t node, int comp, std::span<double> out) const;

  /// Copy with every stride-th time slice (stride must divide steps()).
  SolutionField restricted(int stride) const;

  std::span<const double> data() const { return u_; }
  std::span<double> data() { return u_; }

  std::size_t slice_len() const { return grid_.nodes() * m_; }

 private:
  SpatialGrid grid_;
  int m_ = 0;
  int nt_ = 0;
  double horizon_ = 0.0;
  std::vector<double> u_;
  std::vector<double> sig_grad_;
};

/// Signed space-time density field of the obstacle reaction measure, same
/// layout as SolutionField.  The measure of a cell is density * cell volume
/// * dt; slice 0 carries no mass.
class ReactionMeasureField {
 public:
  ReactionMeasureField() = default;
  ReactionMeasureField(const SpatialGrid& grid, int components, int n_steps, double horizon);

  const SpatialGrid& grid() const { return grid_; }
  int components() const { return m_; }
  int steps() const { return nt_; }
  double dt() const { return horizon_ / nt_; }

  std::span<double> slice(int k) { return {d_.data() + slice_len() * k, slice_len()}; }
  std::span<const double> slice(int k) const { return {d_.data() + slice_len() * k, slice_len()}; }
  double& at(int k, std::size_t node, int comp) { return d_[slice_len() * k + node * m_ + comp]; }
  double at(int k, std::size_t node, int comp) const {
    return d_[slice_len() * k + node * m_ + comp];
  }

  /// Total variation |mu|(E_(0,T]) by absolute-value quadrature.
  double total_variation() const;

  std::span<const double> data() const { return d_; }
  std::size_t slice_len() const { return grid_.nodes() * m_; }

 private:
  SpatialGrid grid_;
  int m_ = 0;
  int nt_ = 0;
  double horizon_ = 0.0;
  std::vector<double> d_;
};

/// Discrete ||v(t_k)||_H^2 of one slice (trapezoid weights in space).
double space_l2_sq(const SpatialGrid& grid, int m, std::span<const double> slice);

/// sup-in-time squared H norm and time-integrated squared gradient norm.
std::pair<double, double> energy_norms(const SolutionField& u);

/// || u - v ||_{L^2(0,T;H)} with trapezoid time weights (fields must share
/// grid and components; time grids may differ by an integer stride).
double l2_time_space_diff(const SolutionField& u, const SolutionField& v);

/// Time integral of ||grad(u - v)||_H^2 (raw gradients, trapezoid in time).
double grad_l2_time_diff_sq(const SolutionField& u, const SolutionField& v);

double max_abs_diff(const SolutionField& u, const SolutionField& v);

}  // namespace pvi
