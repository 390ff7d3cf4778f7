#include "pvi/obstacle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pvi/common.hpp"
#include "pvi/errors.hpp"
#include "pvi/operator.hpp"

namespace pvi {

ObstacleSlice ObstacleFamily::slice(double t, const SpatialGrid& grid) const {
  std::vector<ConvexSet> sets;
  if (space_homogeneous_) {
    const double origin[kMaxDim] = {0.0, 0.0};
    sets.push_back(eval_(t, {origin, static_cast<std::size_t>(grid.dim())}));
    return ObstacleSlice(std::move(sets), true);
  }
  const std::size_t n = grid.interior_nodes();
  sets.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = grid.coords(grid.node_of_interior(i));
    sets.push_back(eval_(t, {c.data(), static_cast<std::size_t>(grid.dim())}));
  }
  return ObstacleSlice(std::move(sets), false);
}

namespace {

inline void sweep_node(const ConvexSet& set, const double* y, int m, double penalty, double* proj,
                       double* density) {
  set.project({y, static_cast<std::size_t>(m)}, {proj, static_cast<std::size_t>(m)});
  for (int i = 0; i < m; ++i) density[i] = -penalty * (y[i] - proj[i]);
}

}  // namespace

void penalty_sweep_serial(const ObstacleSlice& slice, std::span<const double> values, int m,
                          double penalty, std::span<double> proj, std::span<double> density) {
  const std::size_t n = values.size() / m;
  for (std::size_t node = 0; node < n; ++node) {
    sweep_node(slice.at(node), values.data() + node * m, m, penalty, proj.data() + node * m,
               density.data() + node * m);
  }
}

void penalty_sweep(const ObstacleSlice& slice, std::span<const double> values, int m,
                   double penalty, std::span<double> proj, std::span<double> density) {
#ifdef PVI_OPENMP
  const std::size_t n = values.size() / m;
  if (n < 2048) {
    penalty_sweep_serial(slice, values, m, penalty, proj, density);
    return;
  }
#pragma omp parallel for num_threads(max_threads()) schedule(static)
  for (std::size_t node = 0; node < n; ++node) {
    sweep_node(slice.at(node), values.data() + node * m, m, penalty, proj.data() + node * m,
               density.data() + node * m);
  }
#else
  penalty_sweep_serial(slice, values, m, penalty, proj, density);
#endif
}

ContinuityReport validate_continuity(const ObstacleFamily& family, const SpatialGrid& grid,
                             double horizon, int n_steps) {
  ContinuityReport rep;
  const double dt = horizon / n_steps;
  const double r_bound = family.uniform_radius();
  const int dim = grid.dim();

  auto set_at = [&](double t, std::size_t node) {
    const auto c = grid.coords(node);
    return family.at(t, {c.data(), static_cast<std::size_t>(dim)});
  };

  auto check_radius = [&](const ConvexSet& s) {
    // norm_bound is an over-estimate for sampled representations; fall back
    // to sampled support values when it exceeds the declared radius
    double r = s.norm_bound();
    if (r > r_bound && s.kind() == ConvexSet::Kind::Halfspaces) {
      r = 0.0;
      const auto dirs = sphere_directions(s.dim(), 64 * s.dim());
      const std::size_t cnt = dirs.size() / s.dim();
      for (std::size_t i = 0; i < cnt; ++i) {
        r = std::max(r, s.support({dirs.data() + i * s.dim(),
                                   static_cast<std::size_t>(s.dim())}));
      }
    }
    rep.worst_radius = std::max(rep.worst_radius, r);
    if (r > r_bound * (1.0 + 1e-9)) {
      rep.uniform_bound_ok = false;
      throw UniformBoundViolatedError("obstacle set of radius " + std::to_string(r) +
                                      " escapes the declared bound " + std::to_string(r_bound));
    }
  };

  const bool homogeneous = family.space_homogeneous();
  for (int k = 0; k <= n_steps; ++k) {
    const double t = dt * k;
    if (homogeneous) {
      const ConvexSet cur = set_at(t, grid.node_of_interior(0));
      check_radius(cur);
      if (k > 0) {
        const ConvexSet prev = set_at(dt * (k - 1), grid.node_of_interior(0));
        const double rho = hausdorff(cur, prev);
        rep.max_time_rho = std::max(rep.max_time_rho, rho);
      }
      continue;
    }
    for (std::size_t i = 0; i < grid.interior_nodes(); ++i) {
      const std::size_t node = grid.node_of_interior(i);
      const ConvexSet cur = set_at(t, node);
      check_radius(cur);
      if (k > 0) {
        rep.max_time_rho = std::max(rep.max_time_rho, hausdorff(cur, set_at(dt * (k - 1), node)));
      }
      // space neighbours: +x and +y only (each adjacent pair visited once)
      const std::size_t ix = grid.node_ix(node);
      if (ix + 1 < grid.nodes_x() - 1) {
        rep.max_space_rho = std::max(rep.max_space_rho, hausdorff(cur, set_at(t, node + 1)));
      }
      if (dim == 2) {
        const std::size_t iy = grid.node_iy(node);
        if (iy + 1 < grid.nodes_y() - 1) {
          rep.max_space_rho =
              std::max(rep.max_space_rho, hausdorff(cur, set_at(t, node + grid.nodes_x())));
        }
      }
    }
  }
  rep.max_adjacent_rho = std::max(rep.max_time_rho, rep.max_space_rho);
  return rep;
}

SeparationWitness WitnessSpec::materialize(const SpatialGrid& grid, int n_steps, double horizon,
                                           int components) const {
  SeparationWitness w;
  w.epsilon = epsilon;
  w.u_star = SolutionField(grid, components, n_steps, horizon);
  const int d = grid.dim();
  std::vector<double> out(components);
  for (int k = 0; k <= n_steps; ++k) {
    const double t = w.u_star.time_of(k);
    for (std::size_t node = 0; node < grid.nodes(); ++node) {
      const auto c = grid.coords(node);
      u_star(t, {c.data(), static_cast<std::size_t>(d)}, out);
      for (int j = 0; j < components; ++j) w.u_star.at(k, node, j) = out[j];
    }
  }
  w.phi_star.assign(w.u_star.slice(n_steps).begin(), w.u_star.slice(n_steps).end());
  if (f_star) {
    SolutionField fs(grid, components, n_steps, horizon);
    for (int k = 0; k <= n_steps; ++k) {
      const double t = fs.time_of(k);
      for (std::size_t node = 0; node < grid.nodes(); ++node) {
        const auto c = grid.coords(node);
        f_star(t, {c.data(), static_cast<std::size_t>(d)}, out);
        for (int j = 0; j < components; ++j) fs.at(k, node, j) = out[j];
      }
    }
    w.f_star = std::move(fs);
  }
  return w;
}

WitnessReport validate_separation(const ObstacleFamily& family, const SeparationWitness& witness,
                          const CoefficientField& coeff, double pde_residual_tol) {
  WitnessReport rep;
  const SolutionField& us = witness.u_star;
  const SpatialGrid& grid = us.grid();
  const int m = us.components();
  const int nt = us.steps();
  const double eps = witness.epsilon;
  if (!(eps > 0.0)) throw ValidationError("witness margin must be positive", "witness.epsilon");

  rep.worst_margin = std::numeric_limits<double>::max();
  std::vector<double> y(m);
  for (int k = 0; k <= nt; ++k) {
    const ObstacleSlice sl = family.slice(us.time_of(k), grid);
    for (std::size_t i = 0; i < grid.interior_nodes(); ++i) {
      const std::size_t node = grid.node_of_interior(i);
      for (int c = 0; c < m; ++c) y[c] = us.at(k, node, c);
      const ConvexSet& set = sl.at(i);
      // signed margin: boundary distance inside, minus the set distance outside
      const double margin =
          (set.contains(y, 0.0) ? set.dist_to_boundary(y) : -set.dist(y)) - eps;
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        if (margin < 0.0 && rep.violation_step < 0) {
          rep.violation_step = k;
          rep.violation_node = node;
        }
      }
    }
  }
  if (rep.worst_margin < 0.0) rep.pass = false;

  if (witness.f_star.has_value()) {
    // backward-Euler residual of du*/dt + L u* + f* = 0 on interior nodes
    const SolutionField& fs = *witness.f_star;
    const double dt = us.dt();
    const std::size_t ni = grid.interior_nodes();
    std::vector<double> comp(ni), lu(ni);
    for (int k = 0; k < nt; ++k) {
      const DiscreteOperator op = DiscreteOperator::assemble(coeff, grid, us.time_of(k));
      for (int c = 0; c < m; ++c) {
        for (std::size_t i = 0; i < ni; ++i) comp[i] = us.at(k, grid.node_of_interior(i), c);
        op.apply(comp, lu);
        for (std::size_t i = 0; i < ni; ++i) {
          const std::size_t node = grid.node_of_interior(i);
          const double dudt = (us.at(k + 1, node, c) - us.at(k, node, c)) / dt;
          const double res = dudt + lu[i] + fs.at(k, node, c);
          rep.max_pde_residual = std::max(rep.max_pde_residual, std::abs(res));
        }
      }
    }
    if (rep.max_pde_residual > pde_residual_tol) rep.pass = false;
  }
  return rep;
}

WitnessReport require_separation(const ObstacleFamily& family, const SeparationWitness& witness,
                         const CoefficientField& coeff, double pde_residual_tol) {
  WitnessReport rep = validate_separation(family, witness, coeff, pde_residual_tol);
  if (!rep.pass) {
    if (rep.violation_step >= 0) {
      throw MarginViolatedError("witness leaves the shrunken obstacle at step " +
                                    std::to_string(rep.violation_step) + ", node " +
                                    std::to_string(rep.violation_node),
                                static_cast<std::size_t>(rep.violation_step),
                                rep.violation_node);
    }
    throw MarginViolatedError("witness equation residual " +
                                  std::to_string(rep.max_pde_residual) + " above tolerance",
                              0, 0);
  }
  return rep;
}

}  // namespace pvi
