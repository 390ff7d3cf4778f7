#include "pvi/operator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "pvi/common.hpp"
#include "pvi/errors.hpp"

#ifdef PVI_OPENMP
#include <omp.h>
#endif

namespace pvi {

namespace {

struct Entry {
  int col;
  double val;
};

inline double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }
inline double arithmetic(double a, double b) { return 0.5 * (a + b); }

}  // namespace

DiscreteOperator DiscreteOperator::assemble(const CoefficientField& coeff,
                                            const SpatialGrid& grid, double t) {
  DiscreteOperator op;
  op.grid_ = &grid;
  op.t_ = t;

  const std::size_t n = grid.interior_nodes();
  const int dim = grid.dim();

  // coefficient sampled once per grid node (including boundary nodes, whose
  // values enter the face averages of adjacent interior rows)
  const std::size_t total = grid.nodes();
  std::vector<SymMat> a(total);
  bool elliptic_ok = true;
  std::size_t bad_node = 0;
#ifdef PVI_OPENMP
#pragma omp parallel for num_threads(max_threads()) schedule(static)
#endif
  for (std::size_t node = 0; node < total; ++node) {
    const auto c = grid.coords(node);
    std::span<const double> x{c.data(), static_cast<std::size_t>(dim)};
    a[node] = coeff.at(t, x);
    if (!coeff.check_ellipticity(t, x)) {
#ifdef PVI_OPENMP
#pragma omp critical
#endif
      {
        elliptic_ok = false;
        bad_node = node;
      }
    }
  }
  if (!elliptic_ok) {
    throw EllipticityViolatedError(
        "coefficient violates the ellipticity sandwich at node " + std::to_string(bad_node),
        bad_node);
  }

  const double hx = grid.spacing(0);
  std::vector<std::vector<Entry>> rows(n);

#ifdef PVI_OPENMP
#pragma omp parallel for num_threads(max_threads()) schedule(static)
#endif
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t node = grid.node_of_interior(r);
    const std::size_t ix = grid.node_ix(node);
    std::vector<Entry>& row = rows[r];
    double diag = 0.0;
    auto couple = [&](std::size_t other, double w) {
      diag -= w;
      const int oi = grid.interior_index(other);
      if (oi >= 0 && w != 0.0) row.push_back({oi, w});
    };
    if (dim == 1) {
      const double inv = 1.0 / (2.0 * hx * hx);
      couple(node - 1, harmonic(a[node].a11, a[node - 1].a11) * inv);
      couple(node + 1, harmonic(a[node].a11, a[node + 1].a11) * inv);
    } else {
      const double hy = grid.spacing(1);
      const double invx = 1.0 / (2.0 * hx * hx);
      const double invy = 1.0 / (2.0 * hy * hy);
      const double invd = 1.0 / (4.0 * hx * hy);
      const std::size_t nxs = grid.nodes_x();
      const std::size_t W = node - 1, E = node + 1, S = node - nxs, N = node + nxs;
      couple(W, arithmetic(a[node].a11, a[W].a11) * invx);
      couple(E, arithmetic(a[node].a11, a[E].a11) * invx);
      couple(S, arithmetic(a[node].a22, a[S].a22) * invy);
      couple(N, arithmetic(a[node].a22, a[N].a22) * invy);
      // mixed term as +/- two-point fluxes along the two grid diagonals
      const std::size_t NE = N + 1, SW = S - 1, NW = N - 1, SE = S + 1;
      couple(NE, arithmetic(a[node].a12, a[NE].a12) * invd);
      couple(SW, arithmetic(a[node].a12, a[SW].a12) * invd);
      couple(NW, -arithmetic(a[node].a12, a[NW].a12) * invd);
      couple(SE, -arithmetic(a[node].a12, a[SE].a12) * invd);
    }
    row.push_back({static_cast<int>(r), diag});
    std::sort(row.begin(), row.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
  }

  Csr& m = op.mat_;
  m.rows = n;
  m.row_ptr.assign(n + 1, 0);
  for (std::size_t r = 0; r < n; ++r) {
    m.row_ptr[r + 1] = m.row_ptr[r] + static_cast<int>(rows[r].size());
  }
  m.col.resize(m.row_ptr[n]);
  m.val.resize(m.row_ptr[n]);
  for (std::size_t r = 0; r < n; ++r) {
    int k = m.row_ptr[r];
    for (const Entry& e : rows[r]) {
      m.col[k] = e.col;
      m.val[k] = e.val;
      ++k;
    }
  }
  return op;
}

void DiscreteOperator::apply(std::span<const double> x, std::span<double> y) const {
  csr_apply(mat_, x.data(), y.data());
}

double DiscreteOperator::energy_pairing(std::span<const double> x,
                                        std::span<const double> y) const {
  std::vector<double> ay(y.size());
  csr_apply(mat_, y.data(), ay.data());
  return -grid_->cell_volume() * blocked_dot(x, ay);
}

void DiscreteOperator::bands(std::span<double> sub, std::span<double> diag,
                             std::span<double> sup) const {
  const std::size_t n = mat_.rows;
  for (std::size_t r = 0; r < n; ++r) {
    sub[r] = 0.0;
    diag[r] = 0.0;
    sup[r] = 0.0;
    for (int k = mat_.row_ptr[r]; k < mat_.row_ptr[r + 1]; ++k) {
      const int c = mat_.col[k];
      if (c == static_cast<int>(r) - 1) {
        sub[r] = mat_.val[k];
      } else if (c == static_cast<int>(r)) {
        diag[r] = mat_.val[k];
      } else if (c == static_cast<int>(r) + 1) {
        sup[r] = mat_.val[k];
      }
    }
  }
}

}  // namespace pvi
