#pragma once

#include <string>
#include <vector>

#include "pvi/fields.hpp"
#include "pvi/scenario.hpp"

namespace pvi {

struct PenaltySolveResult {
  SolutionField u;
  ReactionMeasureField mu;
  int picard_iterations_max = 0;
  double residual_max = 0.0;
  int dt_halvings = 0;  // retries spent after PicardDiverged
};

/// Solve the penalized system at a fixed penalty level by backward theta
/// stepping from the terminal data; the nonlinearity (driver + penalty) is
/// handled by damped Picard iteration inside each implicit step with damping
/// omega = min(1, 2/(1+n dt)).  On PicardDiverged the step count is doubled
/// for this solve only, up to tol.retry_halvings times.
PenaltySolveResult solve_penalized(const ScenarioSpec& s, double penalty);

/// ||dist(u, D)||_{L^2((0,T] x E)} by rectangle quadrature in time.
double feasibility_l2(const ScenarioSpec& s, const SolutionField& u);

struct LadderRung {
  double penalty = 0.0;
  double sup_l2_sq = 0.0;       // sup_t ||u_n(t)||_H^2
  double grad_int = 0.0;        // int ||grad u_n||_H^2 dt
  double dist_l2 = 0.0;         // feasibility gap
  double diff_l2 = -1.0;        // ||u_n - u_prev||_{L^2(0,T;H)}, -1 for the first rung
  double diff_grad_sq = -1.0;   // int ||grad(u_n - u_prev)||^2 dt
  double tv = 0.0;              // |mu_n|(E_(0,T])
  double min_residual = 0.0;    // worst minimality residual over the test family
  double vi_residual = 0.0;     // worst variational-inequality residual
  int picard_iterations_max = 0;
  int dt_halvings = 0;
  double wall_ms = 0.0;
};

struct ConvergenceReport {
  std::vector<LadderRung> rungs;
  bool feasibility_ok = false;   // finest dist_l2 < tol_feas
  bool cauchy_ok = false;        // successive diffs decayed (slack 1.5)
  bool success = false;
};

struct LadderResult {
  PenaltySolveResult finest;
  ConvergenceReport report;
};

/// Run the penalty ladder; the finest rung is the approximation to (u, mu).
/// Throws NotConvergingError when the successive differences fail to decay
/// across the last three rungs (suppressed with throw_on_stall=false, in
/// which case the report flags carry the outcome).
LadderResult run_ladder(const ScenarioSpec& s, bool throw_on_stall = true);

}  // namespace pvi
