#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pvi/coefficient.hpp"
#include "pvi/errors.hpp"
#include "pvi/fields.hpp"
#include "pvi/grid.hpp"
#include "pvi/linsolve.hpp"
#include "pvi/operator.hpp"
#include "support/oracles.hpp"

using pvi::CoefficientField;
using pvi::DiscreteOperator;
using pvi::SpatialGrid;

namespace {

constexpr double kPi = 3.14159265358979323846;

CoefficientField unit_coeff(int dim) {
  return CoefficientField::constant({1.0, 1.0, 0.0}, 1.0, dim);
}

}  // namespace

TEST_CASE("1d constant-coefficient stencil is the halved second difference") {
  const auto grid = SpatialGrid::line(1.0, 11);
  const double h = grid.spacing(0);
  const auto op = DiscreteOperator::assemble(unit_coeff(1), grid, 0.0);
  std::vector<double> sub(grid.interior_nodes()), diag(grid.interior_nodes()),
      sup(grid.interior_nodes());
  op.bands(sub, diag, sup);
  const double w = 1.0 / (2.0 * h * h);
  for (std::size_t i = 0; i < grid.interior_nodes(); ++i) {
    CHECK(diag[i] == doctest::Approx(-2.0 * w).epsilon(1e-14));
    if (i > 0) CHECK(sub[i] == doctest::Approx(w).epsilon(1e-14));
    if (i + 1 < grid.interior_nodes()) CHECK(sup[i] == doctest::Approx(w).epsilon(1e-14));
  }
}

TEST_CASE("2d identity coefficient gives the halved 5-point laplacian") {
  const auto grid = SpatialGrid::rectangle(1.0, 1.0, 9, 9);
  const double h = grid.spacing(0);
  const auto op = DiscreteOperator::assemble(unit_coeff(2), grid, 0.0);
  const pvi::Csr& m = op.matrix();
  // pick a deep interior row and check the stencil weights
  const std::size_t node = grid.node_index(4, 4);
  const int row = grid.interior_index(node);
  REQUIRE(row >= 0);
  int entries = 0;
  for (int k = m.row_ptr[row]; k < m.row_ptr[row + 1]; ++k) {
    const double v = m.val[k];
    if (m.col[k] == row) {
      CHECK(v == doctest::Approx(-4.0 / (2.0 * h * h)).epsilon(1e-14));
    } else if (v != 0.0) {
      CHECK(v == doctest::Approx(1.0 / (2.0 * h * h)).epsilon(1e-14));
      ++entries;
    }
  }
  CHECK(entries == 4);  // diagonal couplings vanish for a12 = 0
}

TEST_CASE("symmetric square root reproduces the coefficient matrix") {
  std::mt19937_64 rng(11);
  auto u = [&] { return 2.0 * (static_cast<double>(rng()) * 0x1.0p-64) - 1.0; };
  for (int it = 0; it < 200; ++it) {
    // random SPD 2x2: A = R diag(l1,l2) R^T
    const double a = u() * 3.14159;
    const double l1 = 0.3 + 2.0 * std::abs(u());
    const double l2 = 0.3 + 2.0 * std::abs(u());
    const double cs = std::cos(a), sn = std::sin(a);
    pvi::SymMat m;
    m.a11 = cs * cs * l1 + sn * sn * l2;
    m.a22 = sn * sn * l1 + cs * cs * l2;
    m.a12 = cs * sn * (l1 - l2);
    const pvi::SymMat s2 = pvi::sym_sqrt(m, 2);
    CHECK(s2.a11 * s2.a11 + s2.a12 * s2.a12 == doctest::Approx(m.a11).epsilon(1e-10));
    CHECK(s2.a12 * s2.a12 + s2.a22 * s2.a22 == doctest::Approx(m.a22).epsilon(1e-10));
    CHECK(s2.a11 * s2.a12 + s2.a12 * s2.a22 == doctest::Approx(m.a12).epsilon(1e-10));
  }
  const pvi::SymMat one = pvi::sym_sqrt({4.0, 0.0, 0.0}, 1);
  CHECK(one.a11 == doctest::Approx(2.0));
}

TEST_CASE("matrix is exactly symmetric and annihilates constants") {
  const auto grid = SpatialGrid::rectangle(1.0, 1.3, 10, 8);
  const CoefficientField coeff(
      [](double, std::span<const double> x) {
        pvi::SymMat a;
        a.a11 = 1.2 + 0.3 * std::sin(3.0 * x[0]);
        a.a22 = 1.0 + 0.2 * x[1];
        a.a12 = 0.25 * std::cos(2.0 * x[0] + x[1]);
        return a;
      },
      3.0, 2);
  const auto op = DiscreteOperator::assemble(coeff, grid, 0.3);
  const pvi::Csr& m = op.matrix();

  // exact symmetry
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (int k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
      const int c = m.col[k];
      bool found = false;
      for (int k2 = m.row_ptr[c]; k2 < m.row_ptr[c + 1]; ++k2) {
        if (m.col[k2] == static_cast<int>(r)) {
          CHECK(m.val[k2] == m.val[k]);  // bitwise
          found = true;
        }
      }
      CHECK(found);
    }
  }

  // rows whose full stencil is interior sum to zero
  for (std::size_t r = 0; r < m.rows; ++r) {
    const std::size_t node = grid.node_of_interior(r);
    const std::size_t ix = grid.node_ix(node), iy = grid.node_iy(node);
    if (ix < 2 || ix > grid.nodes_x() - 3 || iy < 2 || iy > grid.nodes_y() - 3) continue;
    double sum = 0.0;
    for (int k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) sum += m.val[k];
    CHECK(sum == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("quadratic form is negative semidefinite and elliptically sandwiched") {
  const auto grid = SpatialGrid::rectangle(1.0, 1.0, 9, 9);
  const double lambda = 2.0;
  const CoefficientField coeff(
      [](double t, std::span<const double>) {
        const double cs = std::cos(t), sn = std::sin(t);
        pvi::SymMat a;
        a.a11 = cs * cs + 0.5 * sn * sn;
        a.a22 = sn * sn + 0.5 * cs * cs;
        a.a12 = 0.5 * sn * cs;
        return a;
      },
      lambda, 2);
  const auto op = DiscreteOperator::assemble(coeff, grid, 0.7);
  const auto id = DiscreteOperator::assemble(unit_coeff(2), grid, 0.7);
  std::mt19937_64 rng(31);
  const std::size_t n = grid.interior_nodes();
  std::vector<double> v(n), av(n);
  for (int it = 0; it < 200; ++it) {
    for (double& x : v) x = 2.0 * (static_cast<double>(rng()) * 0x1.0p-64) - 1.0;
    op.apply(v, av);
    double qa = 0.0;
    for (std::size_t i = 0; i < n; ++i) qa += -v[i] * av[i];
    id.apply(v, av);
    double qi = 0.0;
    for (std::size_t i = 0; i < n; ++i) qi += -v[i] * av[i];
    CHECK(qa >= -1e-12);
    CHECK(qa >= qi / lambda - 1e-9 * qi);
    CHECK(qa <= qi * lambda + 1e-9 * qi);
  }
}

TEST_CASE("ellipticity probe failures surface at assembly") {
  const auto grid = SpatialGrid::line(1.0, 9);
  const CoefficientField bad(
      [](double, std::span<const double> x) {
        pvi::SymMat a;
        a.a11 = x[0] > 0.5 ? 5.0 : 1.0;  // escapes lambda = 2
        return a;
      },
      2.0, 1);
  CHECK_THROWS_AS(DiscreteOperator::assemble(bad, grid, 0.0), pvi::EllipticityViolatedError);
}

TEST_CASE("two-material stationary solve matches the flux-continuity solution") {
  // jump at x = 0.5, which falls on a face midpoint for an odd cell count
  const std::size_t nodes = 160;  // 159 cells: x=0.5 is mid-cell
  const auto grid = SpatialGrid::line(1.0, nodes);
  const double a1 = 1.0, a2 = 0.25, split = 0.5;
  const CoefficientField coeff(
      [=](double, std::span<const double> x) {
        pvi::SymMat a;
        a.a11 = x[0] < split ? a1 : a2;
        return a;
      },
      4.0, 1);
  const auto op = DiscreteOperator::assemble(coeff, grid, 0.0);
  const std::size_t ni = grid.interior_nodes();
  std::vector<double> b(ni, 1.0), u(ni, 0.0);
  pvi::solve_stationary(op, b, u);  // -L u = 1

  const oracles::TwoMaterialSolution exact(a1, a2, split, 1.0);
  // frozen spot check of the oracle itself (hand integration constants)
  CHECK(exact.flux_c == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(exact(0.5) == doctest::Approx(0.4).epsilon(1e-12));

  double worst = 0.0;
  for (std::size_t i = 0; i < ni; ++i) {
    const auto c = grid.coords(grid.node_of_interior(i));
    worst = std::max(worst, std::abs(u[i] - exact(c[0])));
  }
  CHECK(worst < 5e-4);  // second-order with the interface at a face midpoint
}

TEST_CASE("full-tensor stationary solve converges at second order") {
  // manufactured u = sin(pi x) sin(pi y) with a constant anisotropic tensor;
  // the source picks up a cosine product from the mixed term
  const double a11 = 1.0, a22 = 1.3, a12 = 0.35;
  const pvi::CoefficientField coeff =
      pvi::CoefficientField::constant({a11, a22, a12}, 3.0, 2);
  auto err_at = [&](std::size_t n) {
    const auto grid = SpatialGrid::rectangle(1.0, 1.0, n, n);
    const auto op = DiscreteOperator::assemble(coeff, grid, 0.0);
    const std::size_t ni = grid.interior_nodes();
    std::vector<double> rhs(ni), u(ni, 0.0);
    for (std::size_t i = 0; i < ni; ++i) {
      const auto xy = grid.coords(grid.node_of_interior(i));
      const double sx = std::sin(kPi * xy[0]), sy = std::sin(kPi * xy[1]);
      const double cx = std::cos(kPi * xy[0]), cy = std::cos(kPi * xy[1]);
      // -L u_ex = pi^2/2 (a11 + a22) sx sy - a12 pi^2 cx cy
      rhs[i] = 0.5 * kPi * kPi * (a11 + a22) * sx * sy - a12 * kPi * kPi * cx * cy;
    }
    pvi::solve_stationary(op, rhs, u);
    double worst = 0.0;
    for (std::size_t i = 0; i < ni; ++i) {
      const auto xy = grid.coords(grid.node_of_interior(i));
      worst = std::max(worst,
                       std::abs(u[i] - std::sin(kPi * xy[0]) * std::sin(kPi * xy[1])));
    }
    return worst;
  };
  const double e1 = err_at(17);
  const double e2 = err_at(33);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
  CHECK(e2 < 5e-3);
}

TEST_CASE("energy norms: zeros, sine profile, zero-component padding") {
  const auto grid = SpatialGrid::line(1.0, 65);
  pvi::SolutionField zero(grid, 1, 8, 1.0);
  const auto [z_l2, z_grad] = pvi::energy_norms(zero);
  CHECK(z_l2 == 0.0);
  CHECK(z_grad == 0.0);

  pvi::SolutionField u(grid, 1, 8, 1.0);
  for (int k = 0; k <= 8; ++k) {
    for (std::size_t node = 0; node < grid.nodes(); ++node) {
      u.at(k, node, 0) = std::sin(kPi * grid.coords(node)[0]);
    }
  }
  const auto [l2, grad] = pvi::energy_norms(u);
  const double h = grid.spacing(0);
  CHECK(l2 == doctest::Approx(0.5).epsilon(20.0 * h * h));
  CHECK(grad == doctest::Approx(kPi * kPi / 2.0).epsilon(20.0 * h * h));

  // zero-padded second component leaves both norms unchanged
  pvi::SolutionField padded(grid, 2, 8, 1.0);
  for (int k = 0; k <= 8; ++k) {
    for (std::size_t node = 0; node < grid.nodes(); ++node) {
      padded.at(k, node, 0) = u.at(k, node, 0);
    }
  }
  const auto [p_l2, p_grad] = pvi::energy_norms(padded);
  CHECK(p_l2 == doctest::Approx(l2).epsilon(1e-14));
  CHECK(p_grad == doctest::Approx(grad).epsilon(1e-14));
}

TEST_CASE("theta step with zero operator returns the right-hand side") {
  const auto grid = SpatialGrid::line(1.0, 9);
  const CoefficientField tiny(
      [](double, std::span<const double>) {
        pvi::SymMat a;
        a.a11 = 1.0;
        return a;
      },
      1.0, 1);
  const auto op = DiscreteOperator::assemble(tiny, grid, 0.0);
  std::vector<double> rhs(grid.interior_nodes());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = std::sin(1.0 + 3.0 * i);
  std::vector<double> v(rhs.size(), 0.0);
  pvi::solve_shifted(op, 0.0, rhs, v);  // c = 0 makes the system the identity
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    CHECK(v[i] == doctest::Approx(rhs[i]).epsilon(1e-14));
  }
}

TEST_CASE("heat step matches the dense eigendecomposition oracle on 8 nodes") {
  const auto grid = SpatialGrid::line(1.0, 10);  // 8 interior nodes
  const auto op = DiscreteOperator::assemble(unit_coeff(1), grid, 0.0);
  const std::size_t n = grid.interior_nodes();
  REQUIRE(n == 8);

  // dense copy of A
  std::vector<double> dense(n * n, 0.0);
  const pvi::Csr& m = op.matrix();
  for (std::size_t r = 0; r < n; ++r) {
    for (int k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) dense[r * n + m.col[k]] = m.val[k];
  }
  const auto eig = oracles::jacobi_eigensolve(dense, static_cast<int>(n));

  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = std::cos(2.0 + 1.7 * i);
  const double dt = 0.01;

  // oracle: v = Q (I - dt L)^-1 Q^T rhs
  std::vector<double> qt(n, 0.0), v_oracle(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double proj = 0.0;
    for (std::size_t i = 0; i < n; ++i) proj += eig.vectors[i * n + k] * rhs[i];
    qt[k] = proj / (1.0 - dt * eig.values[k]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += eig.vectors[i * n + k] * qt[k];
    v_oracle[i] = s;
  }

  std::vector<double> v(n, 0.0);
  pvi::solve_shifted(op, dt, rhs, v);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(v[i] == doctest::Approx(v_oracle[i]).epsilon(1e-10));
  }
}

TEST_CASE("implicit and trapezoidal single steps differ at second order") {
  const auto grid = SpatialGrid::line(1.0, 33);
  const auto op = DiscreteOperator::assemble(unit_coeff(1), grid, 0.0);
  const std::size_t n = grid.interior_nodes();
  std::vector<double> u0(n);
  for (std::size_t i = 0; i < n; ++i) {
    u0[i] = std::sin(kPi * grid.coords(grid.node_of_interior(i))[0]);
  }

  auto step_diff = [&](double dt) {
    // implicit Euler: (I - dt A) v = u0
    std::vector<double> v_ie(n, 0.0);
    pvi::solve_shifted(op, dt, u0, v_ie);
    // trapezoidal: (I - dt/2 A) v = u0 + dt/2 A u0
    std::vector<double> au(n), rhs(n), v_cn(n, 0.0);
    op.apply(u0, au);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = u0[i] + 0.5 * dt * au[i];
    pvi::solve_shifted(op, 0.5 * dt, rhs, v_cn);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(v_ie[i] - v_cn[i]));
    return worst;
  };

  const double d1 = step_diff(0.02);
  const double d2 = step_diff(0.01);
  CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.15));  // one-step gap is O(dt^2)
}

TEST_CASE("manufactured heat solution converges at the scheme orders") {
  // backward solve of du/dt + 1/2 u_xx = 0 from phi = sin on (0, pi):
  // halving h at fixed small dt quarters the error; halving dt at fixed
  // fine h halves it
  auto solve_error = [&](std::size_t nx, int steps) {
    const auto grid = SpatialGrid::line(kPi, nx);
    const auto op_any = DiscreteOperator::assemble(unit_coeff(1), grid, 0.0);
    const std::size_t n = grid.interior_nodes();
    const double dt = 1.0 / steps;
    std::vector<double> u(n), next(n);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = std::sin(grid.coords(grid.node_of_interior(i))[0]);
    }
    for (int k = steps - 1; k >= 0; --k) {
      next = u;
      pvi::solve_shifted(op_any, dt, u, next);
      u = next;
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = grid.coords(grid.node_of_interior(i))[0];
      worst = std::max(worst, std::abs(u[i] - oracles::heat_exact(0.0, x, 1.0)));
    }
    return worst;
  };

  const double e_dt1 = solve_error(257, 32);
  const double e_dt2 = solve_error(257, 64);
  CHECK(e_dt1 / e_dt2 == doctest::Approx(2.0).epsilon(0.2));

  // space order measured with the dt error Richardson-extrapolated away
  auto space_err = [&](std::size_t nx) {
    const double c = solve_error(nx, 512);
    const double f = solve_error(nx, 1024);
    return std::abs(2.0 * f - c);  // leading O(dt) term cancels
  };
  const double s1 = space_err(17);
  const double s2 = space_err(33);
  CHECK(s1 / s2 == doctest::Approx(4.0).epsilon(0.6));
}
