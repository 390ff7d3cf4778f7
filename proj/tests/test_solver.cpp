#include <doctest.h>

#include <cmath>
#include <vector>

#include "pvi/checks.hpp"
#include "pvi/common.hpp"
#include "pvi/config.hpp"
#include "pvi/errors.hpp"
#include "pvi/operator.hpp"
#include "pvi/solver.hpp"
#include "support/oracles.hpp"

using pvi::parse_config_text;
using pvi::ScenarioConfig;
using pvi::ScenarioSpec;

namespace {

ScenarioConfig builtin(const std::string& name) {
  return parse_config_text(pvi::builtin_config_text(name));
}

}  // namespace

TEST_CASE("trivial scenario: zero solution and zero measure at every rung") {
  const ScenarioSpec spec = builtin("trivial_ball").to_spec();
  for (double n : {16.0, 256.0, 4096.0}) {
    const auto sol = pvi::solve_penalized(spec, n);
    CHECK(pvi::max_abs(sol.u.data()) == 0.0);
    CHECK(sol.mu.total_variation() == 0.0);
  }
}

TEST_CASE("no-contact scenario equals the independent unconstrained stepper") {
  ScenarioConfig cfg = builtin("heat_manufactured");
  cfg.nodes_x = 33;
  cfg.steps = 64;
  const ScenarioSpec spec = cfg.to_spec();
  const auto sol = pvi::solve_penalized(spec, 1024.0);

  // oracle: plain backward Euler with its own stencil and solver
  const std::size_t ni = spec.grid.interior_nodes();
  std::vector<double> terminal(ni);
  for (std::size_t i = 0; i < ni; ++i) {
    terminal[i] = spec.phi[spec.grid.node_of_interior(i)];
  }
  const auto slices =
      oracles::heat_backward_euler(terminal, spec.grid.extent(0), spec.horizon, spec.n_steps);

  double worst = 0.0;
  for (int k = 0; k <= spec.n_steps; ++k) {
    for (std::size_t i = 0; i < ni; ++i) {
      worst = std::max(worst,
                       std::abs(sol.u.at(k, spec.grid.node_of_interior(i), 0) - slices[k][i]));
    }
  }
  CHECK(worst < 5e-7);  // dominated by the picard/residual stopping tolerances
}

TEST_CASE("lower-obstacle reaction density is the positive clamp excess") {
  ScenarioConfig cfg = builtin("psor_compare");
  cfg.nodes_x = 17;
  cfg.steps = 32;
  const ScenarioSpec spec = cfg.to_spec();
  const double n_pen = 256.0;
  const auto sol = pvi::solve_penalized(spec, n_pen);

  double worst_gap = 0.0;
  double min_density = 0.0;
  for (int k = 0; k <= spec.n_steps; ++k) {
    const double t = sol.u.time_of(k);
    for (std::size_t i = 0; i < spec.grid.interior_nodes(); ++i) {
      const std::size_t node = spec.grid.node_of_interior(i);
      const auto xy = spec.grid.coords(node);
      const auto box = spec.obstacle.at(t, {xy.data(), 1});
      const double lower = box.box_lower()[0];
      const double upper = box.box_upper()[0];
      const double u = sol.u.at(k, node, 0);
      const double expected =
          n_pen * std::max(lower - u, 0.0) - n_pen * std::max(u - upper, 0.0);
      worst_gap = std::max(worst_gap, std::abs(sol.mu.at(k, node, 0) - expected));
      min_density = std::min(min_density, sol.mu.at(k, node, 0));
    }
  }
  CHECK(worst_gap < 1e-12 * n_pen);
  CHECK(min_density >= 0.0);  // the upper bound is never active
}

TEST_CASE("reaction-measure support stays in the active band at the finest rung") {
  ScenarioConfig cfg = builtin("psor_compare");
  cfg.nodes_x = 17;
  cfg.steps = 32;
  const ScenarioSpec spec = cfg.to_spec();
  const auto sol = pvi::solve_penalized(spec, spec.ladder.back());
  const double delta_active = 2.0 * spec.tol_feas();
  for (int k = 0; k <= spec.n_steps; ++k) {
    const pvi::ObstacleSlice obs = spec.obstacle.slice(sol.u.time_of(k), spec.grid);
    for (std::size_t i = 0; i < spec.grid.interior_nodes(); ++i) {
      const std::size_t node = spec.grid.node_of_interior(i);
      if (std::abs(sol.mu.at(k, node, 0)) > 0.0) {
        const double u = sol.u.at(k, node, 0);
        const auto& set = obs.at(i);
        const double boundary_gap =
            set.contains(std::vector<double>{u}) ? set.dist_to_boundary(std::vector<double>{u})
                                                 : set.dist(std::vector<double>{u});
        CHECK(boundary_gap < delta_active);
      }
    }
  }
}

TEST_CASE("ladder on the trivial scenario reports zero differences") {
  const ScenarioSpec spec = builtin("trivial_ball").to_spec();
  const auto lr = pvi::run_ladder(spec);
  CHECK(lr.report.success);
  for (std::size_t r = 1; r < lr.report.rungs.size(); ++r) {
    CHECK(lr.report.rungs[r].diff_l2 <= 1e-12);
  }
  CHECK(lr.report.rungs.back().tv == 0.0);
}

TEST_CASE("finest rung matches projected SOR on a 1d lower-obstacle problem") {
  ScenarioConfig cfg = builtin("psor_compare");
  cfg.nodes_x = 17;
  cfg.steps = 32;
  const ScenarioSpec spec = cfg.to_spec();
  const auto lr = pvi::run_ladder(spec);
  const auto& u = lr.finest.u;

  // independent complementarity solve on the same discretization
  const std::size_t ni = spec.grid.interior_nodes();
  const double dt = spec.horizon / spec.n_steps;
  std::vector<double> cur(ni), psi(ni);
  for (std::size_t i = 0; i < ni; ++i) cur[i] = spec.phi[spec.grid.node_of_interior(i)];
  double worst = 0.0;
  for (int k = spec.n_steps - 1; k >= 0; --k) {
    const double t = dt * k;
    const auto op = pvi::DiscreteOperator::assemble(spec.coefficient, spec.grid, t);
    for (std::size_t i = 0; i < ni; ++i) {
      const auto xy = spec.grid.coords(spec.grid.node_of_interior(i));
      psi[i] = spec.obstacle.at(t, {xy.data(), 1}).box_lower()[0];
    }
    cur = oracles::psor_step(op.matrix(), dt, cur, psi, cur);
    for (std::size_t i = 0; i < ni; ++i) {
      worst = std::max(worst, std::abs(cur[i] - u.at(k, spec.grid.node_of_interior(i), 0)));
    }
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("finest rung matches projected SOR on an 8x8-node 2d instance") {
  ScenarioConfig cfg = builtin("psor_compare");
  cfg.dimension = 2;
  cfg.nodes_x = 8;
  cfg.nodes_y = 8;
  cfg.extent_y = 1.0;
  cfg.steps = 16;
  cfg.coefficient_kind = "constant";
  cfg.value = 1.0;
  cfg.lambda = 1.0;
  cfg.witness_kind = "stationary_profile";
  cfg.witness_scale = 2.5;  // the 2d profile is flatter than the 1d one
  cfg.epsilon = 0.02;
  const ScenarioSpec spec = cfg.to_spec();
  const auto sol = pvi::solve_penalized(spec, 4096.0);

  const std::size_t ni = spec.grid.interior_nodes();
  const double dt = spec.horizon / spec.n_steps;
  std::vector<double> cur(ni), psi(ni);
  for (std::size_t i = 0; i < ni; ++i) cur[i] = spec.phi[spec.grid.node_of_interior(i)];
  double worst = 0.0;
  for (int k = spec.n_steps - 1; k >= 0; --k) {
    const double t = dt * k;
    const auto op = pvi::DiscreteOperator::assemble(spec.coefficient, spec.grid, t);
    for (std::size_t i = 0; i < ni; ++i) {
      const auto xy = spec.grid.coords(spec.grid.node_of_interior(i));
      psi[i] = spec.obstacle.at(t, {xy.data(), 2}).box_lower()[0];
    }
    cur = oracles::psor_step(op.matrix(), dt, cur, psi, cur);
    for (std::size_t i = 0; i < ni; ++i) {
      worst = std::max(worst, std::abs(cur[i] - sol.u.at(k, spec.grid.node_of_interior(i), 0)));
    }
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("coupled ladder: feasibility decays and differences contract") {
  ScenarioConfig cfg = builtin("coupled_two_component");
  cfg.nodes_x = 17;
  cfg.steps = 32;
  const ScenarioSpec spec = cfg.to_spec();
  const auto lr = pvi::run_ladder(spec);
  const auto& rungs = lr.report.rungs;
  REQUIRE(rungs.size() == spec.ladder.size());

  for (std::size_t r = 1; r < rungs.size(); ++r) {
    CHECK(rungs[r].dist_l2 <= rungs[r - 1].dist_l2 * 1.05 + 1e-12);
  }
  CHECK(rungs.back().dist_l2 < spec.tol_feas());
  for (std::size_t r = 2; r < rungs.size(); ++r) {
    CHECK(rungs[r].diff_l2 <= 1.5 * rungs[r - 1].diff_l2 + 1e-10);
    CHECK(rungs[r].diff_grad_sq <= 1.5 * 1.5 * rungs[r - 1].diff_grad_sq + 1e-10);
  }
  CHECK(lr.report.success);

  const auto eb = pvi::check_energy_bound(spec, rungs);
  CHECK(eb.energy_ok);
  CHECK(eb.tv_ok);
  CHECK(eb.empirical_constant > 0.0);
}

TEST_CASE("minimality residuals: zero measure, h = u, and the obstacle shift") {
  const ScenarioSpec trivial = builtin("trivial_ball").to_spec();
  const auto z = pvi::solve_penalized(trivial, 64.0);

  // mu = 0 makes the residual vanish for any admissible h; h = u (feasible
  // here) does too
  pvi::SolutionField anchor(trivial.grid, trivial.components, trivial.n_steps, trivial.horizon);
  CHECK(pvi::check_minimality(trivial, z.u, z.mu, anchor) == 0.0);
  CHECK(pvi::check_minimality(trivial, z.u, z.mu, z.u) == 0.0);

  // contact case: h = lower bound + margin keeps the pairing nonpositive
  ScenarioConfig cfg = builtin("psor_compare");
  cfg.nodes_x = 17;
  cfg.steps = 32;
  const ScenarioSpec spec = cfg.to_spec();
  const auto sol = pvi::solve_penalized(spec, spec.ladder.back());
  pvi::SolutionField h(spec.grid, 1, spec.n_steps, spec.horizon);
  for (int k = 0; k <= spec.n_steps; ++k) {
    for (std::size_t i = 0; i < spec.grid.interior_nodes(); ++i) {
      const std::size_t node = spec.grid.node_of_interior(i);
      const auto xy = spec.grid.coords(node);
      h.at(k, node, 0) =
          spec.obstacle.at(sol.u.time_of(k), {xy.data(), 1}).box_lower()[0] + 0.01;
    }
  }
  const double res = pvi::check_minimality(spec, sol.u, sol.mu, h);
  CHECK(res <= spec.tol_min());
}

TEST_CASE("minimality rejects test functions that leave the obstacle") {
  const ScenarioSpec spec = builtin("trivial_ball").to_spec();
  const auto sol = pvi::solve_penalized(spec, 64.0);
  pvi::SolutionField bad(spec.grid, spec.components, spec.n_steps, spec.horizon);
  for (int k = 0; k <= spec.n_steps; ++k) {
    for (std::size_t node = 0; node < spec.grid.nodes(); ++node) {
      bad.at(k, node, 0) = 2.0;  // outside the unit ball
    }
  }
  CHECK_THROWS_AS(pvi::check_minimality(spec, sol.u, sol.mu, bad),
                  pvi::TestFunctionInfeasibleError);
}

TEST_CASE("variational inequality residuals are nonpositive up to tolerance") {
  const ScenarioSpec trivial = builtin("trivial_ball").to_spec();
  const auto z = pvi::solve_penalized(trivial, 64.0);
  // v = u (= 0) and v = 0 both collapse the terminal term
  CHECK(pvi::check_variational_inequality(trivial, z.u, z.u) <= trivial.tol_vi());

  ScenarioConfig cfg = builtin("psor_compare");
  cfg.nodes_x = 17;
  cfg.steps = 32;
  const ScenarioSpec spec = cfg.to_spec();
  const auto sol = pvi::solve_penalized(spec, spec.ladder.back());
  const auto family = pvi::build_test_family(spec, sol.u);
  bool saw_witness = false;
  for (const auto& member : family) {
    if (!member.zero_boundary) continue;
    const double res = pvi::check_variational_inequality(spec, sol.u, member.v);
    CHECK(res <= spec.tol_vi());
    if (member.name == "witness_projected") saw_witness = true;
  }
  CHECK(saw_witness);
}

TEST_CASE("driver evaluation: kinds, constants, and the non-finite guard") {
  // zero coupling matrix gives the zero map
  auto d0 = pvi::Driver::linear_coupling(2, {0.0, 0.0, 0.0, 0.0});
  std::vector<double> y = {1.0, -2.0}, z = {0.1, 0.2}, out(2);
  d0.eval(0.0, {}, y, z, out);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
  CHECK(d0.alpha() == doctest::Approx(0.0).epsilon(1e-12));

  // f = -y has Lipschitz constants (1, 0)
  auto dneg = pvi::Driver::linear_coupling(2, {-1.0, 0.0, 0.0, -1.0});
  CHECK(dneg.alpha() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(dneg.beta() == 0.0);
  dneg.eval(0.0, {}, y, z, out);
  CHECK(out[0] == doctest::Approx(-1.0));
  CHECK(out[1] == doctest::Approx(2.0));

  // hand-computed matrix-vector product
  auto dc = pvi::Driver::linear_coupling(2, {0.0, 3.0, -2.0, 0.0});
  dc.eval(0.0, {}, y, z, out);
  CHECK(out[0] == doctest::Approx(3.0 * y[1]));
  CHECK(out[1] == doctest::Approx(-2.0 * y[0]));

  // non-finite inputs surface as NonFiniteError through driver_eval
  const ScenarioSpec spec = builtin("moving_box_example2").to_spec();
  std::vector<double> bad_y = {std::nan("")};
  std::vector<double> bad_z = {0.0};
  std::vector<double> o(1);
  const double mid[1] = {0.5};
  CHECK_THROWS_AS(pvi::driver_eval(spec, 0.1, {mid, 1}, bad_y, bad_z, o),
                  pvi::NonFiniteError);
}

TEST_CASE("picard divergence is retried and eventually reported") {
  ScenarioConfig cfg = builtin("coupled_two_component");
  cfg.nodes_x = 9;
  cfg.steps = 4;
  cfg.coupling = {0.0, 2000.0, 2000.0, 0.0};  // alpha dt >> 1 even after retries
  cfg.amplitude = 0.05;
  cfg.tol.retry_halvings = 2;
  cfg.tol.picard_cap = 400;
  const ScenarioSpec spec = cfg.to_spec();
  CHECK_THROWS_AS(pvi::solve_penalized(spec, 16.0), pvi::PicardDivergedError);
}
