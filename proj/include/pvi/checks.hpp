#pragma once

#include <string>
#include <vector>

#include "pvi/fields.hpp"
#include "pvi/scenario.hpp"

namespace pvi {

struct LadderRung;  // solver.hpp

/// One member of the admissible test family: a grid function valued in
/// D(t,x) at every interior node.  Only zero-boundary members are usable as
/// variational-inequality test functions.
struct AdmissibleField {
  std::string name;
  SolutionField v;
  bool zero_boundary = true;
};

/// Deterministic test family: the separation witness and its projection,
/// the configured interior anchor, the projection of u itself, and clipped
/// bump perturbations of u per component.
std::vector<AdmissibleField> build_test_family(const ScenarioSpec& s, const SolutionField& u);

/// max over lower limits t of sum_i int_t^T int_E (u^i - h^i) d mu^i.
/// Nonpositive (up to solver residuals) for the converged pair.  Throws
/// TestFunctionInfeasibleError when h leaves the obstacle at a node.
double check_minimality(const ScenarioSpec& s, const SolutionField& u,
                        const ReactionMeasureField& mu, const SolutionField& h);

/// Signed residual LHS - 1/2 ||v(T)-phi||_H^2 of the parabolic variational
/// inequality, evaluated with quadrature rules matched to the backward theta
/// scheme (rectangle in time at the implicit nodes, backward differences of
/// v).  Nonpositive for the converged solution; v must vanish on the
/// boundary and take values in D(t,x).
double check_variational_inequality(const ScenarioSpec& s, const SolutionField& u,
                                    const SolutionField& v);

struct AdmissibleCheckSummary {
  double min_residual_max = 0.0;
  double vi_residual_max = 0.0;
  std::vector<std::pair<std::string, double>> min_residuals;
  std::vector<std::pair<std::string, double>> vi_residuals;
};

AdmissibleCheckSummary run_admissible_checks(const ScenarioSpec& s, const SolutionField& u,
                                             const ReactionMeasureField& mu);

struct EnergyBoundReport {
  bool energy_ok = false;   // max energy <= 2 x median over rungs
  bool tv_ok = false;       // same for the total-variation trace
  double energy_max = 0.0;
  double energy_median = 0.0;
  double tv_max = 0.0;
  double tv_median = 0.0;
  double empirical_constant = 0.0;  // max energy / (||phi||^2 + ||f0||^2)
};

/// Uniform-in-n character of the energy and total-variation traces.
EnergyBoundReport check_energy_bound(const ScenarioSpec& s, const std::vector<LadderRung>& rungs);

}  // namespace pvi
