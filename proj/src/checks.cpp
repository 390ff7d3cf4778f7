#include "pvi/checks.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <string>

#include "pvi/common.hpp"
#include "pvi/errors.hpp"
#include "pvi/operator.hpp"
#include "pvi/solver.hpp"

namespace pvi {

namespace {

// project every interior node of `src` onto the obstacle, boundary stays 0
SolutionField project_field(const ScenarioSpec& s, const SolutionField& src) {
  SolutionField out(src.grid(), src.components(), src.steps(), src.horizon());
  const SpatialGrid& grid = src.grid();
  const int m = src.components();
  std::vector<double> y(m), p(m);
  for (int k = 0; k <= src.steps(); ++k) {
    const ObstacleSlice obs = s.obstacle.slice(src.time_of(k), grid);
    for (std::size_t i = 0; i < grid.interior_nodes(); ++i) {
      const std::size_t node = grid.node_of_interior(i);
      for (int c = 0; c < m; ++c) y[c] = src.at(k, node, c);
      obs.at(i).project(y, p);
      for (int c = 0; c < m; ++c) out.at(k, node, c) = p[c];
    }
  }
  return out;
}

void require_feasible(const ScenarioSpec& s, const SolutionField& v, const std::string& name) {
  const SpatialGrid& grid = v.grid();
  const int m = v.components();
  const double tol = 1e-9 * (1.0 + s.obstacle.uniform_radius());
  std::vector<double> y(m);
  for (int k = 0; k <= v.steps(); ++k) {
    const ObstacleSlice obs = s.obstacle.slice(v.time_of(k), grid);
    for (std::size_t i = 0; i < grid.interior_nodes(); ++i) {
      const std::size_t node = grid.node_of_interior(i);
      for (int c = 0; c < m; ++c) y[c] = v.at(k, node, c);
      if (!obs.at(i).contains(y, tol)) {
        throw TestFunctionInfeasibleError("test function '" + name +
                                              "' leaves the obstacle at step " +
                                              std::to_string(k) + ", node " +
                                              std::to_string(node),
                                          static_cast<std::size_t>(k), node);
      }
    }
  }
}

}  // namespace

std::vector<AdmissibleField> build_test_family(const ScenarioSpec& s, const SolutionField& u) {
  std::vector<AdmissibleField> family;
  const SpatialGrid& grid = u.grid();
  const int m = u.components();
  const int nt = u.steps();

  if (s.witness.has_value()) {
    SeparationWitness w = s.witness->materialize(grid, nt, u.horizon(), m);
    family.push_back({"witness", w.u_star, true});
    family.push_back({"witness_projected", project_field(s, w.u_star), true});
  }
  if (s.anchor.has_value()) {
    SolutionField anchor(grid, m, nt, u.horizon());
    for (int k = 0; k <= nt; ++k) {
      for (std::size_t node = 0; node < grid.nodes(); ++node) {
        for (int c = 0; c < m; ++c) anchor.at(k, node, c) = (*s.anchor)[c];
      }
    }
    family.push_back({"anchor", std::move(anchor), false});
  }
  family.push_back({"solution_projected", project_field(s, u), true});

  // clipped bump perturbations of u, one pair per component
  const double delta = 0.1 * s.obstacle.uniform_radius();
  for (int c = 0; c < m; ++c) {
    for (double sign : {1.0, -1.0}) {
      SolutionField pert = u;
      for (int k = 0; k <= nt; ++k) {
        for (std::size_t node = 0; node < grid.nodes(); ++node) {
          if (grid.is_boundary(node)) continue;
          const auto x = grid.coords(node);
          double bump = std::sin(3.14159265358979323846 * x[0] / grid.extent(0));
          if (grid.dim() == 2) {
            bump *= std::sin(3.14159265358979323846 * x[1] / grid.extent(1));
          }
          pert.at(k, node, c) += sign * delta * bump;
        }
      }
      const std::string name =
          "clipped_bump_c" + std::to_string(c) + (sign > 0 ? "_plus" : "_minus");
      family.push_back({name, project_field(s, pert), true});
    }
  }
  return family;
}

double check_minimality(const ScenarioSpec& s, const SolutionField& u,
                        const ReactionMeasureField& mu, const SolutionField& h) {
  require_feasible(s, h, "minimality");
  const SpatialGrid& grid = u.grid();
  const int m = u.components();
  const int nt = u.steps();
  const double dt = u.dt();
  const double vol = grid.cell_volume();

  // per-slice pairing, then the residual for lower limit t_j is a suffix sum
  std::vector<double> pairing(nt + 1, 0.0);
  for (int k = 1; k <= nt; ++k) {
    double p = 0.0;
    for (std::size_t i = 0; i < grid.interior_nodes(); ++i) {
      const std::size_t node = grid.node_of_interior(i);
      for (int c = 0; c < m; ++c) {
        p += (u.at(k, node, c) - h.at(k, node, c)) * mu.at(k, node, c);
      }
    }
    pairing[k] = p * dt * vol;
  }
  double worst = -std::numeric_limits<double>::max();
  double suffix = 0.0;
  for (int j = nt - 1; j >= 0; --j) {
    suffix += pairing[j + 1];
    worst = std::max(worst, suffix);
  }
  return worst;
}

double check_variational_inequality(const ScenarioSpec& s, const SolutionField& u,
                                    const SolutionField& v) {
  require_feasible(s, v, "vi");
  const SpatialGrid& grid = u.grid();
  const int m = u.components();
  const int nt = u.steps();
  const double dt = u.dt();
  const double vol = grid.cell_volume();
  const std::size_t ni = grid.interior_nodes();
  const int d = grid.dim();

  double lhs = 0.0;
  std::vector<double> uc(ni), wc(ni), au(ni);
  std::vector<double> z(static_cast<std::size_t>(m) * d);
  std::vector<double> f(m);
  for (int k = 0; k < nt; ++k) {
    const double t = u.time_of(k);
    const DiscreteOperator op = DiscreteOperator::assemble(s.coefficient, grid, t);
    double dv_pair = 0.0, form = 0.0, fu_pair = 0.0;
    for (int c = 0; c < m; ++c) {
      for (std::size_t i = 0; i < ni; ++i) {
        const std::size_t node = grid.node_of_interior(i);
        uc[i] = u.at(k, node, c);
        wc[i] = v.at(k, node, c) - uc[i];
        dv_pair += (v.at(k + 1, node, c) - v.at(k, node, c)) * wc[i];
      }
      op.apply(uc, au);
      for (std::size_t i = 0; i < ni; ++i) form += -au[i] * wc[i];
    }
    for (std::size_t i = 0; i < ni; ++i) {
      const std::size_t node = grid.node_of_interior(i);
      const auto x = grid.coords(node);
      double y[kMaxComponents];
      for (int c = 0; c < m; ++c) {
        y[c] = u.at(k, node, c);
        for (int a = 0; a < d; ++a) z[c * d + a] = u.sig_grad(k, node, c, a);
      }
      s.driver.eval(t, {x.data(), static_cast<std::size_t>(d)},
                    {y, static_cast<std::size_t>(m)}, z, f);
      for (int c = 0; c < m; ++c) {
        fu_pair += f[c] * (v.at(k, node, c) - u.at(k, node, c));
      }
    }
    lhs += vol * dv_pair - dt * vol * form + dt * vol * fu_pair;
  }

  // terminal term 1/2 ||v(T) - phi||_H^2
  double term = 0.0;
  for (std::size_t node = 0; node < grid.nodes(); ++node) {
    for (int c = 0; c < m; ++c) {
      const double diff = v.at(nt, node, c) - s.phi[node * m + c];
      term += diff * diff;
    }
  }
  term *= 0.5 * vol;
  return lhs - term;
}

AdmissibleCheckSummary run_admissible_checks(const ScenarioSpec& s, const SolutionField& u,
                                             const ReactionMeasureField& mu) {
  AdmissibleCheckSummary out;
  const auto family = build_test_family(s, u);
  out.min_residual_max = -std::numeric_limits<double>::max();
  out.vi_residual_max = -std::numeric_limits<double>::max();
  for (const AdmissibleField& h : family) {
    const double r = check_minimality(s, u, mu, h.v);
    out.min_residuals.emplace_back(h.name, r);
    out.min_residual_max = std::max(out.min_residual_max, r);
    if (h.zero_boundary) {
      const double rv = check_variational_inequality(s, u, h.v);
      out.vi_residuals.emplace_back(h.name, rv);
      out.vi_residual_max = std::max(out.vi_residual_max, rv);
    }
  }
  return out;
}

EnergyBoundReport check_energy_bound(const ScenarioSpec& s,
                                     const std::vector<LadderRung>& rungs) {
  EnergyBoundReport rep;
  if (rungs.size() < 2) return rep;
  std::vector<double> energy, tv;
  for (const LadderRung& r : rungs) {
    energy.push_back(r.sup_l2_sq + r.grad_int);
    tv.push_back(r.tv);
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  rep.energy_max = *std::max_element(energy.begin(), energy.end());
  rep.energy_median = median(energy);
  rep.tv_max = *std::max_element(tv.begin(), tv.end());
  rep.tv_median = median(tv);
  const double floor = 1e-14 * s.energy_scale();
  rep.energy_ok = rep.energy_max <= 2.0 * rep.energy_median + floor;
  rep.tv_ok = rep.tv_max <= 2.0 * rep.tv_median + floor;

  // empirical constant against the data norm
  double phi_sq = space_l2_sq(s.grid, s.components, s.phi);
  double denom = phi_sq;
  if (denom <= 0.0) denom = s.energy_scale();
  rep.empirical_constant = rep.energy_max / denom;
  return rep;
}

}  // namespace pvi
