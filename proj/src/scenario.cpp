#include "pvi/scenario.hpp"

#include <cmath>
#include <string>

#include "pvi/common.hpp"
#include "pvi/errors.hpp"
#include "pvi/rng.hpp"

namespace pvi {

Driver Driver::zero(int m) {
  Driver d;
  d.kind_ = Kind::Zero;
  d.m_ = m;
  return d;
}

Driver Driver::linear_coupling(int m, std::vector<double> c) {
  if (c.size() != static_cast<std::size_t>(m) * m) {
    throw ValidationError("coupling matrix must be m x m", "driver.c");
  }
  Driver d;
  d.kind_ = Kind::LinearCoupling;
  d.m_ = m;
  d.c_ = std::move(c);
  // spectral norm by power iteration on c^T c
  std::vector<double> v(m, 1.0), w(m);
  for (int it = 0; it < 200; ++it) {
    for (int i = 0; i < m; ++i) {
      w[i] = 0.0;
      for (int j = 0; j < m; ++j) w[i] += d.c_[i * m + j] * v[j];
    }
    for (int j = 0; j < m; ++j) {
      v[j] = 0.0;
      for (int i = 0; i < m; ++i) v[j] += d.c_[i * m + j] * w[i];
    }
    const double n = norm(v);
    if (n == 0.0) break;
    for (double& x : v) x /= n;
  }
  for (int i = 0; i < m; ++i) {
    w[i] = 0.0;
    for (int j = 0; j < m; ++j) w[i] += d.c_[i * m + j] * v[j];
  }
  d.alpha_ = norm(w) / std::max(norm(v), 1e-300);
  d.beta_ = 0.0;
  return d;
}

Driver Driver::clipped_nonlinear(int m, int dim, double kappa, double gamma) {
  Driver d;
  d.kind_ = Kind::ClippedNonlinear;
  d.m_ = m;
  d.dim_ = dim;
  d.kappa_ = kappa;
  d.gamma_ = gamma;
  d.alpha_ = std::abs(kappa);
  d.beta_ = std::abs(gamma) * std::sqrt(static_cast<double>(dim));
  return d;
}

void Driver::eval(double, std::span<const double>, std::span<const double> y,
                  std::span<const double> z, std::span<double> out) const {
  switch (kind_) {
    case Kind::Zero:
      for (int i = 0; i < m_; ++i) out[i] = 0.0;
      return;
    case Kind::LinearCoupling:
      for (int i = 0; i < m_; ++i) {
        double s = 0.0;
        for (int j = 0; j < m_; ++j) s += c_[i * m_ + j] * y[j];
        out[i] = s;
      }
      return;
    case Kind::ClippedNonlinear:
      for (int i = 0; i < m_; ++i) {
        double s = kappa_ * std::tanh(y[i]);
        for (int a = 0; a < dim_; ++a) s += gamma_ * std::tanh(z[i * dim_ + a]);
        out[i] = s;
      }
      return;
  }
}

double ScenarioSpec::energy_scale() const {
  const int m = components;
  double phi_sq = space_l2_sq(grid, m, phi);
  // || f(.,.,0,0) ||^2 over the space-time cylinder
  double f0_sq = 0.0;
  std::vector<double> y(m, 0.0), z(static_cast<std::size_t>(m) * grid.dim(), 0.0), out(m);
  const double dt_q = horizon / n_steps;
  for (int k = 0; k <= n_steps; ++k) {
    double slice = 0.0;
    for (std::size_t i = 0; i < grid.interior_nodes(); ++i) {
      const std::size_t node = grid.node_of_interior(i);
      const auto c = grid.coords(node);
      driver.eval(dt_q * k, {c.data(), static_cast<std::size_t>(grid.dim())}, y, z, out);
      for (int j = 0; j < m; ++j) slice += out[j] * out[j];
    }
    const double tw = (k == 0 || k == n_steps) ? 0.5 : 1.0;
    f0_sq += tw * dt_q * slice * grid.cell_volume();
  }
  const double scale = phi_sq + f0_sq;
  double domain = grid.extent(0);
  if (grid.dim() == 2) domain *= grid.extent(1);
  const double r = obstacle.uniform_radius();
  const double floor = r * r * domain * (1.0 + horizon);
  return std::max(scale, floor);
}

void ScenarioSpec::validate() const {
  const int m = components;
  if (m < 1 || m > kMaxComponents) {
    throw ValidationError("unsupported component count", "components");
  }
  if (phi.size() != grid.nodes() * static_cast<std::size_t>(m)) {
    throw ValidationError("terminal data has the wrong shape", "phi");
  }
  if (!(horizon > 0.0)) throw ValidationError("horizon must be positive", "horizon");
  if (n_steps < 1) throw ValidationError("need at least one time step", "steps");
  for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
    if (!(ladder[i] < ladder[i + 1])) {
      throw ValidationError("penalty ladder must be strictly increasing", "ladder");
    }
  }
  if (!ladder.empty() && !(ladder.front() > 0.0)) {
    throw ValidationError("penalty levels must be positive", "ladder");
  }

  // terminal containment phi(x) in D(T,x) at interior nodes
  const ObstacleSlice terminal = obstacle.slice(horizon, grid);
  std::vector<double> y(m);
  for (std::size_t i = 0; i < grid.interior_nodes(); ++i) {
    const std::size_t node = grid.node_of_interior(i);
    for (int c = 0; c < m; ++c) y[c] = phi[node * m + c];
    if (!terminal.at(i).contains(y, 1e-12 * (1.0 + obstacle.uniform_radius()))) {
      throw ValidationError("terminal data leaves the obstacle at node " + std::to_string(node),
                            "phi");
    }
  }

  // driver finite at the origin probe on the whole grid
  std::vector<double> z(static_cast<std::size_t>(m) * grid.dim(), 0.0), out(m);
  const double dt_q = horizon / n_steps;
  for (int k = 0; k <= n_steps; ++k) {
    for (std::size_t i = 0; i < grid.interior_nodes(); ++i) {
      const std::size_t node = grid.node_of_interior(i);
      const auto c = grid.coords(node);
      std::span<const double> x{c.data(), static_cast<std::size_t>(grid.dim())};
      y.assign(m, 0.0);
      driver.eval(dt_q * k, x, y, z, out);
      for (int j = 0; j < m; ++j) {
        if (!std::isfinite(out[j])) {
          throw ValidationError("driver is not finite at the origin probe", "driver");
        }
      }
    }
  }

  // sampled Lipschitz check against the declared constants
  std::vector<double> y1(m), y2(m), z1(z.size()), z2(z.size()), o1(m), o2(m);
  NormalSampler rng(derive_seed(seed, 0x5C3AA));
  const double scale_y = std::max(1.0, obstacle.uniform_radius());
  for (int probe = 0; probe < 256; ++probe) {
    for (int j = 0; j < m; ++j) {
      y1[j] = scale_y * rng();
      y2[j] = scale_y * rng();
    }
    for (std::size_t j = 0; j < z.size(); ++j) {
      z1[j] = scale_y * rng();
      z2[j] = scale_y * rng();
    }
    const double mid[kMaxDim] = {0.5 * grid.extent(0),
                                 grid.dim() == 2 ? 0.5 * grid.extent(1) : 0.0};
    std::span<const double> x{mid, static_cast<std::size_t>(grid.dim())};
    const double t = horizon * 0.37;
    driver.eval(t, x, y1, z1, o1);
    driver.eval(t, x, y2, z2, o2);
    double dy = 0.0, dz = 0.0, df = 0.0;
    for (int j = 0; j < m; ++j) {
      dy += (y1[j] - y2[j]) * (y1[j] - y2[j]);
      df += (o1[j] - o2[j]) * (o1[j] - o2[j]);
    }
    for (std::size_t j = 0; j < z.size(); ++j) dz += (z1[j] - z2[j]) * (z1[j] - z2[j]);
    const double bound = driver.alpha() * std::sqrt(dy) + driver.beta() * std::sqrt(dz);
    if (std::sqrt(df) > bound * (1.0 + 1e-9) + 1e-12) {
      throw ValidationError("driver violates its declared Lipschitz constants", "driver");
    }
  }

  if (witness.has_value()) {
    if (!(witness->epsilon > 0.0)) {
      throw ValidationError("witness margin must be positive", "witness.epsilon");
    }
    if (!witness->u_star) {
      throw ValidationError("witness requires a u* evaluator", "witness");
    }
  }
  if (anchor.has_value() && anchor->size() != static_cast<std::size_t>(m)) {
    throw ValidationError("anchor must have one entry per component", "anchor");
  }
}

void driver_eval(const ScenarioSpec& s, double t, std::span<const double> x,
                 std::span<const double> y, std::span<const double> z, std::span<double> out) {
  s.driver.eval(t, x, y, z, out);
  for (double v : out) {
    if (!std::isfinite(v)) {
      throw NonFiniteError("driver produced a non-finite value at t=" + std::to_string(t));
    }
  }
}

}  // namespace pvi
