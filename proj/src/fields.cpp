#include "pvi/fields.hpp"

#include <cmath>
#include <cstdlib>

#include "pvi/common.hpp"
#include "pvi/errors.hpp"
#include "pvi/kernels.hpp"

namespace pvi {

SolutionField::SolutionField(const SpatialGrid& grid, int components, int n_steps, double horizon)
    : grid_(grid), m_(components), nt_(n_steps), horizon_(horizon) {
  u_.assign(static_cast<std::size_t>(nt_ + 1) * slice_len(), 0.0);
}

ReactionMeasureField::ReactionMeasureField(const SpatialGrid& grid, int components, int n_steps,
                                           double horizon)
    : grid_(grid), m_(components), nt_(n_steps), horizon_(horizon) {
  d_.assign(static_cast<std::size_t>(nt_ + 1) * slice_len(), 0.0);
}

void SolutionField::raw_gradient(int k, std::size_t node, int comp,
                                 std::span<double> out) const {
  const SpatialGrid& g = grid_;
  const std::size_t ix = g.node_ix(node);
  const double hx = g.spacing(0);
  auto val = [&](std::size_t n) { return at(k, n, comp); };
  if (ix == 0) {
    out[0] = (val(node + 1) - val(node)) / hx;
  } else if (ix == g.nodes_x() - 1) {
    out[0] = (val(node) - val(node - 1)) / hx;
  } else {
    out[0] = (val(node + 1) - val(node - 1)) / (2.0 * hx);
  }
  if (g.dim() == 2) {
    const std::size_t iy = g.node_iy(node);
    const std::size_t nx = g.nodes_x();
    const double hy = g.spacing(1);
    if (iy == 0) {
      out[1] = (val(node + nx) - val(node)) / hy;
    } else if (iy == g.nodes_y() - 1) {
      out[1] = (val(node) - val(node - nx)) / hy;
    } else {
      out[1] = (val(node + nx) - val(node - nx)) / (2.0 * hy);
    }
  }
}

void SolutionField::compute_gradients(const CoefficientField& coeff) {
  const SpatialGrid& g = grid_;
  const int d = g.dim();
  sig_grad_.assign(static_cast<std::size_t>(nt_ + 1) * g.nodes() * m_ * d, 0.0);
  for (int k = 0; k <= nt_; ++k) {
    const double t = time_of(k);
    const std::size_t nodes = g.nodes();
#ifdef PVI_OPENMP
#pragma omp parallel for num_threads(max_threads()) schedule(static)
#endif
    for (std::size_t node = 0; node < nodes; ++node) {
      const auto c = g.coords(node);
      const SymMat s = coeff.sqrt_at(t, {c.data(), static_cast<std::size_t>(d)});
      double raw[kMaxDim] = {0.0, 0.0};
      for (int i = 0; i < m_; ++i) {
        raw_gradient(k, node, i, {raw, static_cast<std::size_t>(d)});
        const std::size_t base = ((static_cast<std::size_t>(k) * nodes + node) * m_ + i) * d;
        if (d == 1) {
          sig_grad_[base] = s.a11 * raw[0];
        } else {
          sig_grad_[base] = s.a11 * raw[0] + s.a12 * raw[1];
          sig_grad_[base + 1] = s.a12 * raw[0] + s.a22 * raw[1];
        }
      }
    }
  }
}

SolutionField SolutionField::restricted(int stride) const {
  if (stride <= 1) return *this;
  if (nt_ % stride != 0) throw Error("restriction stride must divide the step count");
  SolutionField out(grid_, m_, nt_ / stride, horizon_);
  for (int k = 0; k <= out.nt_; ++k) {
    auto src = slice(k * stride);
    std::copy(src.begin(), src.end(), out.slice(k).begin());
  }
  return out;
}

double ReactionMeasureField::total_variation() const {
  const double w = grid_.cell_volume() * dt();
  double tv = 0.0;
  for (int k = 1; k <= nt_; ++k) {
    tv += blocked_sum_abs(slice(k)) * w;
  }
  return tv;
}

double space_l2_sq(const SpatialGrid& grid, int m, std::span<const double> slice) {
  double s = 0.0;
  const std::size_t nodes = grid.nodes();
  for (std::size_t node = 0; node < nodes; ++node) {
    double q = 0.0;
    for (int i = 0; i < m; ++i) {
      const double v = slice[node * m + i];
      q += v * v;
    }
    s += grid.trapezoid_weight(node) * q;
  }
  return s * grid.cell_volume();
}

namespace {

double grad_l2_sq_slice(const SolutionField& u, int k, const SolutionField* v, int kv) {
  const SpatialGrid& g = u.grid();
  const int d = g.dim();
  const int m = u.components();
  double s = 0.0;
  double ga[kMaxDim], gb[kMaxDim];
  for (std::size_t node = 0; node < g.nodes(); ++node) {
    double q = 0.0;
    for (int i = 0; i < m; ++i) {
      u.raw_gradient(k, node, i, {ga, static_cast<std::size_t>(d)});
      if (v) {
        v->raw_gradient(kv, node, i, {gb, static_cast<std::size_t>(d)});
        for (int a = 0; a < d; ++a) ga[a] -= gb[a];
      }
      for (int a = 0; a < d; ++a) q += ga[a] * ga[a];
    }
    s += g.trapezoid_weight(node) * q;
  }
  return s * g.cell_volume();
}

}  // namespace

std::pair<double, double> energy_norms(const SolutionField& u) {
  double sup_l2 = 0.0;
  double grad_int = 0.0;
  const int nt = u.steps();
  const double dt = u.dt();
  for (int k = 0; k <= nt; ++k) {
    sup_l2 = std::max(sup_l2, space_l2_sq(u.grid(), u.components(), u.slice(k)));
    const double tw = (k == 0 || k == nt) ? 0.5 : 1.0;
    grad_int += tw * dt * grad_l2_sq_slice(u, k, nullptr, 0);
  }
  return {sup_l2, grad_int};
}

namespace {

// Time grids may differ by an integer factor; iterate on the coarser one.
void common_stride(const SolutionField& u, const SolutionField& v, int& su, int& sv, int& nt) {
  if (u.steps() >= v.steps()) {
    if (u.steps() % v.steps() != 0) throw Error("incompatible time grids");
    su = u.steps() / v.steps();
    sv = 1;
    nt = v.steps();
  } else {
    if (v.steps() % u.steps() != 0) throw Error("incompatible time grids");
    su = 1;
    sv = v.steps() / u.steps();
    nt = u.steps();
  }
}

}  // namespace

double l2_time_space_diff(const SolutionField& u, const SolutionField& v) {
  int su, sv, nt;
  common_stride(u, v, su, sv, nt);
  const double dt = u.horizon() / nt;
  const int m = u.components();
  double acc = 0.0;
  std::vector<double> diff(u.slice_len());
  for (int k = 0; k <= nt; ++k) {
    auto a = u.slice(k * su);
    auto b = v.slice(k * sv);
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a[i] - b[i];
    const double tw = (k == 0 || k == nt) ? 0.5 : 1.0;
    acc += tw * dt * space_l2_sq(u.grid(), m, diff);
  }
  return std::sqrt(acc);
}

double grad_l2_time_diff_sq(const SolutionField& u, const SolutionField& v) {
  int su, sv, nt;
  common_stride(u, v, su, sv, nt);
  const double dt = u.horizon() / nt;
  double acc = 0.0;
  for (int k = 0; k <= nt; ++k) {
    const double tw = (k == 0 || k == nt) ? 0.5 : 1.0;
    acc += tw * dt * grad_l2_sq_slice(u, k * su, &v, k * sv);
  }
  return acc;
}

double max_abs_diff(const SolutionField& u, const SolutionField& v) {
  int su, sv, nt;
  common_stride(u, v, su, sv, nt);
  double worst = 0.0;
  for (int k = 0; k <= nt; ++k) {
    auto a = u.slice(k * su);
    auto b = v.slice(k * sv);
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

}  // namespace pvi
