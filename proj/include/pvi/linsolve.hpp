#pragma once

#include <span>

#include "pvi/operator.hpp"

namespace pvi {

struct LinearSolveReport {
  int iterations = 0;
  double residual = 0.0;
};

struct LinearSolveOptions {
  double cg_tol = 1e-10;
  int cg_cap_factor = 10;  // iteration cap = factor * unknowns
};

/// Solve (I - c A) v = rhs on packed interior vectors.  1d operators use the
/// direct tridiagonal solve; 2d uses conjugate gradients warm-started from
/// the incoming `v`.  Throws SolverDivergedError when CG hits its cap with a
/// residual above tolerance.
LinearSolveReport solve_shifted(const DiscreteOperator& op, double c,
                                std::span<const double> rhs, std::span<double> v,
                                const LinearSolveOptions& opt = {});

/// Solve -A u = b (the stationary problem); same solver selection.
LinearSolveReport solve_stationary(const DiscreteOperator& op, std::span<const double> b,
                                   std::span<double> u, const LinearSolveOptions& opt = {});

}  // namespace pvi
