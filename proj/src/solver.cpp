#include "pvi/solver.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "pvi/checks.hpp"
#include "pvi/common.hpp"
#include "pvi/errors.hpp"
#include "pvi/linsolve.hpp"
#include "pvi/operator.hpp"

#ifdef PVI_OPENMP
#include <omp.h>
#endif

namespace pvi {

namespace {

// State of one implicit step's Picard iteration; interior-packed node-major.
struct StepWorkspace {
  std::size_t ni = 0;
  int m = 0;
  int dim = 1;
  std::vector<double> v;        // current iterate
  std::vector<double> v_new;
  std::vector<double> g;        // driver + penalty density at the iterate
  std::vector<double> proj;
  std::vector<double> density;
  std::vector<double> rhs_c, sol_c, av_c;  // per-component scratch
  std::vector<double> full;     // one full-grid slice for gradients
  std::vector<double> z;        // sigma grad v per interior node, m x d
  std::vector<SymMat> sigma;    // per interior node at the implicit time
};

void gather_component(const std::vector<double>& v, int m, int c, std::vector<double>& out) {
  const std::size_t ni = out.size();
  for (std::size_t i = 0; i < ni; ++i) out[i] = v[i * m + c];
}

// sigma*grad of the iterate; central in the interior, one-sided at walls.
void iterate_gradients(const SpatialGrid& grid, StepWorkspace& w) {
  const int m = w.m;
  const int d = w.dim;
  std::fill(w.full.begin(), w.full.end(), 0.0);
  for (std::size_t i = 0; i < w.ni; ++i) {
    const std::size_t node = grid.node_of_interior(i);
    for (int c = 0; c < m; ++c) w.full[node * m + c] = w.v[i * m + c];
  }
  const double hx = grid.spacing(0);
  const double hy = d == 2 ? grid.spacing(1) : 1.0;
  const std::size_t nx = grid.nodes_x();
  for (std::size_t i = 0; i < w.ni; ++i) {
    const std::size_t node = grid.node_of_interior(i);
    const SymMat& s = w.sigma[i];
    for (int c = 0; c < m; ++c) {
      const double gx = (w.full[(node + 1) * m + c] - w.full[(node - 1) * m + c]) / (2.0 * hx);
      if (d == 1) {
        w.z[i * m + c] = s.a11 * gx;
      } else {
        const double gy =
            (w.full[(node + nx) * m + c] - w.full[(node - nx) * m + c]) / (2.0 * hy);
        w.z[(i * m + c) * 2] = s.a11 * gx + s.a12 * gy;
        w.z[(i * m + c) * 2 + 1] = s.a12 * gx + s.a22 * gy;
      }
    }
  }
}

// driver + penalty density at the current iterate -> w.g
void eval_g(const ScenarioSpec& s, const ObstacleSlice& obs, double t, double penalty,
            StepWorkspace& w) {
  const int m = w.m;
  penalty_sweep(obs, w.v, m, penalty, w.proj, w.density);
  const bool needs_z = s.driver.beta() > 0.0;
  if (needs_z) iterate_gradients(s.grid, w);
  const int d = w.dim;
  const std::size_t ni = w.ni;
#ifdef PVI_OPENMP
#pragma omp parallel for num_threads(max_threads()) schedule(static)
#endif
  for (std::size_t i = 0; i < ni; ++i) {
    const std::size_t node = s.grid.node_of_interior(i);
    const auto c = s.grid.coords(node);
    double f[kMaxComponents];
    const double* zrow = needs_z ? w.z.data() + i * m * d : w.z.data();
    s.driver.eval(t, {c.data(), static_cast<std::size_t>(d)},
                  {w.v.data() + i * m, static_cast<std::size_t>(m)},
                  {zrow, static_cast<std::size_t>(m * d)}, {f, static_cast<std::size_t>(m)});
    for (int j = 0; j < m; ++j) w.g[i * m + j] = f[j] + w.density[i * m + j];
  }
  for (double val : w.g) {
    if (!std::isfinite(val)) throw NonFiniteError("driver or penalty produced a non-finite value");
  }
}

PenaltySolveResult solve_with_steps(const ScenarioSpec& s, double penalty, int nt, int halvings) {
  const SpatialGrid& grid = s.grid;
  const int m = s.components;
  const int d = grid.dim();
  const std::size_t ni = grid.interior_nodes();
  const double dt = s.horizon / nt;
  const double theta = s.tol.theta;
  const double omega = std::min(1.0, 2.0 / (1.0 + penalty * dt));

  PenaltySolveResult out;
  out.u = SolutionField(grid, m, nt, s.horizon);
  out.mu = ReactionMeasureField(grid, m, nt, s.horizon);
  out.dt_halvings = halvings;

  // terminal slice
  auto term = out.u.slice(nt);
  std::copy(s.phi.begin(), s.phi.end(), term.begin());

  StepWorkspace w;
  w.ni = ni;
  w.m = m;
  w.dim = d;
  w.v.resize(ni * m);
  w.v_new.resize(ni * m);
  w.g.resize(ni * m);
  w.proj.resize(ni * m);
  w.density.resize(ni * m);
  w.rhs_c.resize(ni);
  w.sol_c.resize(ni);
  w.av_c.resize(ni);
  w.full.resize(grid.nodes() * m);
  w.z.resize(ni * m * d);
  w.sigma.resize(ni);

  LinearSolveOptions lin;
  lin.cg_tol = s.tol.cg_tol;
  lin.cg_cap_factor = s.tol.cg_cap_factor;

  std::vector<double> expl(ni * m);   // explicit part of the theta scheme
  std::vector<double> u_next(ni * m);

  // terminal density (zero when the terminal data sits inside the obstacle)
  {
    const ObstacleSlice obs_T = s.obstacle.slice(s.horizon, grid);
    for (std::size_t i = 0; i < ni; ++i) {
      const std::size_t node = grid.node_of_interior(i);
      for (int c = 0; c < m; ++c) w.v[i * m + c] = out.u.at(nt, node, c);
    }
    penalty_sweep(obs_T, w.v, m, penalty, w.proj, w.density);
    for (std::size_t i = 0; i < ni; ++i) {
      const std::size_t node = grid.node_of_interior(i);
      for (int c = 0; c < m; ++c) out.mu.at(nt, node, c) = w.density[i * m + c];
    }
  }

  DiscreteOperator op_next;  // operator at t_{k+1}, reused for the explicit part
  bool have_op_next = false;

  for (int k = nt - 1; k >= 0; --k) {
    const double t_new = dt * k;
    const double t_old = dt * (k + 1);
    const DiscreteOperator op = DiscreteOperator::assemble(s.coefficient, grid, t_new);
    const ObstacleSlice obs = s.obstacle.slice(t_new, grid);

    for (std::size_t i = 0; i < ni; ++i) {
      const std::size_t node = grid.node_of_interior(i);
      for (int c = 0; c < m; ++c) u_next[i * m + c] = out.u.at(k + 1, node, c);
    }

    // sigma at the implicit time, for gradient-coupled drivers
    if (s.driver.beta() > 0.0) {
      for (std::size_t i = 0; i < ni; ++i) {
        const auto c = grid.coords(grid.node_of_interior(i));
        w.sigma[i] = s.coefficient.sqrt_at(t_new, {c.data(), static_cast<std::size_t>(d)});
      }
    }

    // explicit part: u_{k+1} + (1-theta) dt (A u + G)|_{k+1}
    expl = u_next;
    if (theta < 1.0) {
      if (!have_op_next) {
        op_next = DiscreteOperator::assemble(s.coefficient, grid, t_old);
      }
      const ObstacleSlice obs_old = s.obstacle.slice(t_old, grid);
      w.v = u_next;
      if (s.driver.beta() > 0.0) {
        for (std::size_t i = 0; i < ni; ++i) {
          const auto c = grid.coords(grid.node_of_interior(i));
          w.sigma[i] = s.coefficient.sqrt_at(t_old, {c.data(), static_cast<std::size_t>(d)});
        }
      }
      eval_g(s, obs_old, t_old, penalty, w);
      for (int c = 0; c < m; ++c) {
        gather_component(u_next, m, c, w.rhs_c);
        op_next.apply(w.rhs_c, w.av_c);
        for (std::size_t i = 0; i < ni; ++i) {
          expl[i * m + c] += (1.0 - theta) * dt * (w.av_c[i] + w.g[i * m + c]);
        }
      }
      if (s.driver.beta() > 0.0) {
        for (std::size_t i = 0; i < ni; ++i) {
          const auto c = grid.coords(grid.node_of_interior(i));
          w.sigma[i] = s.coefficient.sqrt_at(t_new, {c.data(), static_cast<std::size_t>(d)});
        }
      }
    }

    // damped Picard on v = solve(expl + theta dt G(v))
    w.v = u_next;
    double res_inf = 0.0;
    bool converged = false;
    int iter = 0;
    for (; iter < s.tol.picard_cap; ++iter) {
      eval_g(s, obs, t_new, penalty, w);
      double change = 0.0;
      for (int c = 0; c < m; ++c) {
        for (std::size_t i = 0; i < ni; ++i) {
          w.rhs_c[i] = expl[i * m + c] + theta * dt * w.g[i * m + c];
        }
        gather_component(w.v, m, c, w.sol_c);  // warm start
        solve_shifted(op, theta * dt, w.rhs_c, w.sol_c, lin);
        for (std::size_t i = 0; i < ni; ++i) {
          const double prev = w.v[i * m + c];
          const double next = (1.0 - omega) * prev + omega * w.sol_c[i];
          w.v_new[i * m + c] = next;
          change = std::max(change, std::abs(next - prev));
        }
      }
      std::swap(w.v, w.v_new);
      // absolute blow-up guard; legitimate iterates stay near the obstacle scale
      if (!std::isfinite(change) ||
          change > 1e10 * (1.0 + s.obstacle.uniform_radius())) {
        break;
      }
      const double scale = 1.0 + max_abs(w.v);
      if (change < s.tol.tol_picard * scale) {
        // equation residual of the converged iterate
        eval_g(s, obs, t_new, penalty, w);
        res_inf = 0.0;
        for (int c = 0; c < m; ++c) {
          gather_component(w.v, m, c, w.sol_c);
          op.apply(w.sol_c, w.av_c);
          for (std::size_t i = 0; i < ni; ++i) {
            const double r = w.sol_c[i] - theta * dt * w.av_c[i] - expl[i * m + c] -
                             theta * dt * w.g[i * m + c];
            res_inf = std::max(res_inf, std::abs(r));
          }
        }
        if (res_inf < s.tol.tol_res * scale) {
          converged = true;
          break;
        }
      }
    }
    if (!converged) {
      throw PicardDivergedError("implicit step " + std::to_string(k) +
                                    " failed to contract at penalty " + std::to_string(penalty),
                                static_cast<std::size_t>(k));
    }
    out.picard_iterations_max = std::max(out.picard_iterations_max, iter + 1);
    out.residual_max = std::max(out.residual_max, res_inf);

    // store slice and the density recomputed from the converged iterate
    penalty_sweep(obs, w.v, m, penalty, w.proj, w.density);
    for (std::size_t i = 0; i < ni; ++i) {
      const std::size_t node = grid.node_of_interior(i);
      for (int c = 0; c < m; ++c) {
        out.u.at(k, node, c) = w.v[i * m + c];
        out.mu.at(k, node, c) = w.density[i * m + c];
      }
    }
    op_next = op;
    have_op_next = true;
  }

  out.u.compute_gradients(s.coefficient);
  return out;
}

}  // namespace

PenaltySolveResult solve_penalized(const ScenarioSpec& s, double penalty) {
  if (!(penalty >= 0.0)) throw ValidationError("penalty level must be nonnegative", "penalty");
  int nt = s.n_steps;
  for (int attempt = 0;; ++attempt) {
    try {
      return solve_with_steps(s, penalty, nt, attempt);
    } catch (const PicardDivergedError&) {
      if (attempt >= s.tol.retry_halvings) throw;
      nt *= 2;  // halve dt for this rung only
    }
  }
}

double feasibility_l2(const ScenarioSpec& s, const SolutionField& u) {
  const SpatialGrid& grid = s.grid;
  const int m = u.components();
  const double dt = u.dt();
  const double vol = grid.cell_volume();
  double acc = 0.0;
  std::vector<double> y(m);
  for (int k = 1; k <= u.steps(); ++k) {
    const ObstacleSlice obs = s.obstacle.slice(u.time_of(k), grid);
    double slice = 0.0;
    for (std::size_t i = 0; i < grid.interior_nodes(); ++i) {
      const std::size_t node = grid.node_of_interior(i);
      for (int c = 0; c < m; ++c) y[c] = u.at(k, node, c);
      const double dd = obs.at(i).dist(y);
      slice += dd * dd;
    }
    acc += dt * vol * slice;
  }
  return std::sqrt(acc);
}

LadderResult run_ladder(const ScenarioSpec& s, bool throw_on_stall) {
  if (s.ladder.size() < 3) {
    throw ValidationError("penalty ladder needs at least three rungs", "ladder");
  }
  LadderResult out;
  ConvergenceReport& rep = out.report;
  PenaltySolveResult prev;
  bool have_prev = false;

  for (std::size_t r = 0; r < s.ladder.size(); ++r) {
    const double n_pen = s.ladder[r];
    const auto t0 = std::chrono::steady_clock::now();
    PenaltySolveResult cur = solve_penalized(s, n_pen);
    const auto t1 = std::chrono::steady_clock::now();

    LadderRung row;
    row.penalty = n_pen;
    const auto [sup_l2, grad_int] = energy_norms(cur.u);
    row.sup_l2_sq = sup_l2;
    row.grad_int = grad_int;
    row.dist_l2 = feasibility_l2(s, cur.u);
    row.tv = cur.mu.total_variation();
    if (have_prev) {
      row.diff_l2 = l2_time_space_diff(cur.u, prev.u);
      row.diff_grad_sq = grad_l2_time_diff_sq(cur.u, prev.u);
    }
    const AdmissibleCheckSummary checks = run_admissible_checks(s, cur.u, cur.mu);
    row.min_residual = checks.min_residual_max;
    row.vi_residual = checks.vi_residual_max;
    row.picard_iterations_max = cur.picard_iterations_max;
    row.dt_halvings = cur.dt_halvings;
    row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    rep.rungs.push_back(row);

    prev = std::move(cur);
    have_prev = true;
  }
  out.finest = std::move(prev);

  rep.feasibility_ok = rep.rungs.back().dist_l2 < s.tol_feas();

  // successive differences must decay with slack 1.5; a stall across the
  // last three rungs is the hard error.  Differences at the Picard noise
  // level are treated as converged.
  const double floor = 1e3 * s.tol.tol_picard * std::sqrt(s.energy_scale());
  rep.cauchy_ok = true;
  bool tail_ok = true;
  const std::size_t nr = rep.rungs.size();
  for (std::size_t j = 1; j + 1 < nr; ++j) {
    const double d0 = rep.rungs[j].diff_l2;
    const double d1 = rep.rungs[j + 1].diff_l2;
    if (d1 > 1.5 * d0 + floor) {
      rep.cauchy_ok = false;
      if (j + 1 == nr - 1) tail_ok = false;
    }
  }
  rep.success = rep.feasibility_ok && rep.cauchy_ok;
  if (throw_on_stall && !tail_ok) {
    throw NotConvergingError(
        "successive rung differences failed to decay across the last three rungs");
  }
  return out;
}

}  // namespace pvi
