#pragma once

#include <array>
#include <functional>
#include <span>

#include "pvi/grid.hpp"

namespace pvi {

/// Symmetric dxd matrix for d in {1,2}, stored as (a11, a22, a12).
struct SymMat {
  double a11 = 1.0;
  double a22 = 1.0;
  double a12 = 0.0;
};

/// Uniformly elliptic symmetric coefficient a(t,x) with ellipticity constant
/// lambda >= 1: lambda^-1 |y|^2 <= y^T a y <= lambda |y|^2.
class CoefficientField {
 public:
  using Evaluator = std::function<SymMat(double t, std::span<const double> x)>;

  CoefficientField() = default;
  CoefficientField(Evaluator eval, double lambda, int dim)
      : eval_(std::move(eval)), lambda_(lambda), dim_(dim) {}

  static CoefficientField constant(SymMat a, double lambda, int dim);

  SymMat at(double t, std::span<const double> x) const { return eval_(t, x); }
  double lambda() const { return lambda_; }
  int dim() const { return dim_; }

  /// Symmetric square root of a(t,x); column-major 2x2 (symmetric so the
  /// layout is immaterial), or the scalar sqrt in 1d packed in s11.
  SymMat sqrt_at(double t, std::span<const double> x) const;

  /// Probe the ellipticity sandwich at `x` along the coordinate axes and
  /// diagonals.  Returns false when some probe falls outside
  /// [lambda^-1, lambda] with relative slack `tol`.
  bool check_ellipticity(double t, std::span<const double> x, double tol = 1e-9) const;

 private:
  Evaluator eval_;
  double lambda_ = 1.0;
  int dim_ = 1;
};

/// sigma with sigma*sigma = a for a symmetric positive definite 2x2 `a`.
SymMat sym_sqrt(const SymMat& a, int dim);

}  // namespace pvi
