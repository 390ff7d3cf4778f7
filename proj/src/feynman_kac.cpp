#include "pvi/feynman_kac.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pvi/common.hpp"
#include "pvi/errors.hpp"
#include "pvi/kernels.hpp"
#include "pvi/rng.hpp"

#ifdef PVI_OPENMP
#include <omp.h>
#endif

namespace pvi {

void interpolate_slice(const SpatialGrid& grid, std::span<const double> slice, int m,
                       std::span<const double> x, std::span<double> out) {
  const double hx = grid.spacing(0);
  const std::size_t nx = grid.nodes_x();
  double fx = x[0] / hx;
  std::size_t ix = static_cast<std::size_t>(std::clamp(fx, 0.0, static_cast<double>(nx - 2)));
  ix = std::min(ix, nx - 2);
  const double wx = std::clamp(fx - static_cast<double>(ix), 0.0, 1.0);
  if (grid.dim() == 1) {
    for (int c = 0; c < m; ++c) {
      out[c] = (1.0 - wx) * slice[ix * m + c] + wx * slice[(ix + 1) * m + c];
    }
    return;
  }
  const double hy = grid.spacing(1);
  const std::size_t ny = grid.nodes_y();
  double fy = x[1] / hy;
  std::size_t iy = static_cast<std::size_t>(std::clamp(fy, 0.0, static_cast<double>(ny - 2)));
  iy = std::min(iy, ny - 2);
  const double wy = std::clamp(fy - static_cast<double>(iy), 0.0, 1.0);
  const std::size_t base = iy * nx + ix;
  for (int c = 0; c < m; ++c) {
    const double v00 = slice[base * m + c];
    const double v10 = slice[(base + 1) * m + c];
    const double v01 = slice[(base + nx) * m + c];
    const double v11 = slice[(base + nx + 1) * m + c];
    out[c] = (1.0 - wx) * (1.0 - wy) * v00 + wx * (1.0 - wy) * v10 + (1.0 - wx) * wy * v01 +
             wx * wy * v11;
  }
}

namespace {

// interpolate sigma*grad(u) rows at x from the per-node gradient storage
void interpolate_gradients(const SolutionField& u, int k, std::span<const double> x,
                           std::span<double> z) {
  const SpatialGrid& grid = u.grid();
  const int m = u.components();
  const int d = grid.dim();
  const double hx = grid.spacing(0);
  const std::size_t nx = grid.nodes_x();
  double fx = x[0] / hx;
  std::size_t ix = static_cast<std::size_t>(
      std::clamp(fx, 0.0, static_cast<double>(nx - 2)));
  const double wx = std::clamp(fx - static_cast<double>(ix), 0.0, 1.0);
  if (d == 1) {
    for (int c = 0; c < m; ++c) {
      z[c] = (1.0 - wx) * u.sig_grad(k, ix, c, 0) + wx * u.sig_grad(k, ix + 1, c, 0);
    }
    return;
  }
  const double hy = grid.spacing(1);
  const std::size_t ny = grid.nodes_y();
  double fy = x[1] / hy;
  std::size_t iy = static_cast<std::size_t>(
      std::clamp(fy, 0.0, static_cast<double>(ny - 2)));
  const double wy = std::clamp(fy - static_cast<double>(iy), 0.0, 1.0);
  const std::size_t n00 = iy * nx + ix;
  for (int c = 0; c < m; ++c) {
    for (int a = 0; a < d; ++a) {
      z[c * d + a] = (1.0 - wx) * (1.0 - wy) * u.sig_grad(k, n00, c, a) +
                     wx * (1.0 - wy) * u.sig_grad(k, n00 + 1, c, a) +
                     (1.0 - wx) * wy * u.sig_grad(k, n00 + nx, c, a) +
                     wx * wy * u.sig_grad(k, n00 + nx + 1, c, a);
    }
  }
}

}  // namespace

std::vector<FKEstimate> feynman_kac_check(const ScenarioSpec& s, const SolutionField& u,
                                          const ReactionMeasureField& mu, int time_step,
                                          std::size_t node, const FKOptions& opt) {
  const SpatialGrid& grid = s.grid;
  const int m = u.components();
  const int d = grid.dim();
  const int nt = u.steps();
  const double horizon = u.horizon();
  const double dt_solver = u.dt();
  const double start_time = u.time_of(time_step);
  const auto start_coords = grid.coords(node);
  if (grid.is_boundary(node)) {
    throw ValidationError("Feynman-Kac check requires an interior node", "mc.node");
  }
  if (!u.has_gradients()) {
    throw ValidationError("solution field is missing gradients", "mc");
  }

  const std::size_t np = opt.n_paths;
  std::vector<double> vals(np * m, 0.0);

#ifdef PVI_OPENMP
#pragma omp parallel for num_threads(max_threads()) schedule(static)
#endif
  for (std::size_t j = 0; j < np; ++j) {
    NormalSampler rng(derive_seed(opt.seed ^ (0x9E37u + node * 31 + time_step), j));
    double pos[kMaxDim] = {start_coords[0], start_coords[1]};
    double t = start_time;
    double acc[kMaxComponents] = {0};
    double y[kMaxComponents], g[kMaxComponents], rho[kMaxComponents];
    double z[kMaxComponents * kMaxDim];
    bool boundary = false;
    while (t < horizon - 1e-14) {
      const double step = std::min(opt.dt, horizon - t);
      const int k = std::min(static_cast<int>(t / dt_solver), nt - 1);
      std::span<const double> x{pos, static_cast<std::size_t>(d)};
      // running cost: driver at the grid solution plus the penalty density
      interpolate_slice(grid, u.slice(k), m, x, {y, static_cast<std::size_t>(m)});
      interpolate_gradients(u, k, x, {z, static_cast<std::size_t>(m * d)});
      interpolate_slice(grid, mu.slice(k), m, x, {rho, static_cast<std::size_t>(m)});
      s.driver.eval(t, x, {y, static_cast<std::size_t>(m)},
                    {z, static_cast<std::size_t>(m * d)}, {g, static_cast<std::size_t>(m)});
      for (int c = 0; c < m; ++c) acc[c] += (g[c] + rho[c]) * step;

      const SymMat sg = s.coefficient.sqrt_at(t, x);
      const double sdt = std::sqrt(step);
      double db[kMaxDim] = {0.0, 0.0};
      for (int a = 0; a < d; ++a) db[a] = sdt * rng();
      if (d == 1) {
        pos[0] += sg.a11 * db[0];
      } else {
        const double n0 = pos[0] + sg.a11 * db[0] + sg.a12 * db[1];
        const double n1 = pos[1] + sg.a12 * db[0] + sg.a22 * db[1];
        pos[0] = n0;
        pos[1] = n1;
      }
      t += step;
      if (!grid.point_inside({pos, static_cast<std::size_t>(d)})) {
        boundary = true;  // zero Dirichlet data: no terminal contribution
        break;
      }
    }
    if (!boundary) {
      std::span<const double> x{pos, static_cast<std::size_t>(d)};
      interpolate_slice(grid, u.slice(nt), m, x, {y, static_cast<std::size_t>(m)});
      for (int c = 0; c < m; ++c) acc[c] += y[c];
    }
    for (int c = 0; c < m; ++c) vals[j * m + c] = acc[c];
  }

  // deterministic blockwise reduction, then sample standard errors
  const double h = grid.dim() == 2 ? std::max(grid.spacing(0), grid.spacing(1)) : grid.spacing(0);
  double scale = max_abs(u.data());
  std::vector<FKEstimate> out;
  for (int c = 0; c < m; ++c) {
    std::vector<double> comp(np);
    for (std::size_t j = 0; j < np; ++j) comp[j] = vals[j * m + c];
    std::vector<double> ones(np, 1.0);
    const double mean = blocked_dot(comp, ones) / static_cast<double>(np);
    double var = 0.0;
    for (double v : comp) var += (v - mean) * (v - mean);
    var /= std::max<std::size_t>(1, np - 1);
    FKEstimate e;
    e.component = c;
    e.time_step = time_step;
    e.node = node;
    e.estimate = mean;
    e.std_error = std::sqrt(var / static_cast<double>(np));
    e.grid_value = u.at(time_step, node, c);
    e.band = 3.0 * e.std_error + opt.c_disc * (h + opt.dt);
    e.pass = std::abs(e.estimate - e.grid_value) <= e.band;
    e.n_paths = np;
    if (scale > 0.0 && e.std_error > 0.1 * scale) {
      throw InsufficientPathsError("standard error " + std::to_string(e.std_error) +
                                   " exceeds 10% of the solution scale " +
                                   std::to_string(scale));
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace pvi
