#include "pvi/convex_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pvi/common.hpp"
#include "pvi/errors.hpp"
#include "pvi/rng.hpp"

namespace pvi {

ConvexOptions& convex_options() {
  static ConvexOptions opts;
  return opts;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

double sq(double x) { return x * x; }

// Nonnegative least squares min |N^T lam - d| by projected gradient.  Used to
// certify that a direction lies in the cone of the halfspace normals, which
// is equivalent to the support function being finite along it.
struct ConeFit {
  bool in_cone = false;
  double bound = 0.0;  // sup <d,x> <= lam^T b when in_cone
};

ConeFit fit_cone(std::span<const double> normals, std::span<const double> offsets, int m,
                 std::span<const double> d) {
  const std::size_t k = offsets.size();
  std::vector<double> lam(k, 0.0), resid(m), grad(k);
  const double step = 1.0 / static_cast<double>(k);
  double rnorm = 0.0;
  for (int sweep = 0; sweep < 20000; ++sweep) {
    for (int i = 0; i < m; ++i) {
      double s = -d[i];
      for (std::size_t j = 0; j < k; ++j) s += lam[j] * normals[j * m + i];
      resid[i] = s;
    }
    rnorm = norm(resid);
    if (rnorm < 1e-9 * (1.0 + norm(d))) break;
    for (std::size_t j = 0; j < k; ++j) {
      double g = 0.0;
      for (int i = 0; i < m; ++i) g += normals[j * m + i] * resid[i];
      lam[j] = std::max(0.0, lam[j] - step * g);
    }
  }
  ConeFit out;
  out.in_cone = rnorm < 1e-7 * (1.0 + norm(d));
  if (out.in_cone) {
    double b = 0.0;
    for (std::size_t j = 0; j < k; ++j) b += lam[j] * offsets[j];
    out.bound = b;
  }
  return out;
}

}  // namespace

ConvexSet ConvexSet::box(std::vector<double> lower, std::vector<double> upper) {
  if (lower.empty() || lower.size() != upper.size()) {
    throw ValidationError("box bounds must be nonempty and of equal dimension", "box");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) {
      throw ValidationError("box requires lower < upper in every coordinate", "box");
    }
  }
  ConvexSet s;
  s.kind_ = Kind::Box;
  s.dim_ = static_cast<int>(lower.size());
  double nb = 0.0;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    nb += sq(std::max(std::abs(lower[i]), std::abs(upper[i])));
  }
  s.norm_bound_ = std::sqrt(nb);
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

ConvexSet ConvexSet::ball(std::vector<double> center, double radius) {
  if (center.empty()) throw ValidationError("ball center must be nonempty", "ball");
  if (!(radius > 0.0)) throw ValidationError("ball radius must be positive", "ball");
  ConvexSet s;
  s.kind_ = Kind::Ball;
  s.dim_ = static_cast<int>(center.size());
  s.norm_bound_ = norm(center) + radius;
  s.center_ = std::move(center);
  s.radius_ = radius;
  return s;
}

ConvexSet ConvexSet::halfspaces(std::vector<double> normals, std::vector<double> offsets,
                                std::vector<double> interior) {
  const int m = static_cast<int>(interior.size());
  const std::size_t k = offsets.size();
  if (m == 0 || k == 0 || normals.size() != k * static_cast<std::size_t>(m)) {
    throw ValidationError("halfspace arrays have inconsistent shapes", "halfspaces");
  }
  // normalize rows to unit length, scaling offsets accordingly
  for (std::size_t j = 0; j < k; ++j) {
    double n2 = 0.0;
    for (int i = 0; i < m; ++i) n2 += sq(normals[j * m + i]);
    const double len = std::sqrt(n2);
    if (!(len > 0.0)) throw ValidationError("halfspace normal must be nonzero", "halfspaces");
    for (int i = 0; i < m; ++i) normals[j * m + i] /= len;
    offsets[j] /= len;
  }
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += normals[j * m + i] * interior[i];
    if (!(s < offsets[j])) {
      throw ValidationError("interior point does not satisfy halfspace " + std::to_string(j) +
                                " strictly",
                            "halfspaces");
    }
  }
  // boundedness: support finite along every +/- coordinate axis
  double axis_bound = 0.0;
  std::vector<double> d(m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (double sign : {1.0, -1.0}) {
      d.assign(m, 0.0);
      d[i] = sign;
      ConeFit fit = fit_cone(normals, offsets, m, d);
      if (!fit.in_cone) {
        throw ValidationError("halfspace intersection is unbounded along a coordinate axis",
                              "halfspaces");
      }
      axis_bound = std::max(axis_bound, fit.bound);
    }
  }
  ConvexSet s;
  s.kind_ = Kind::Halfspaces;
  s.dim_ = m;
  s.norm_bound_ = std::sqrt(static_cast<double>(m)) * axis_bound * 1.0000001 + 1e-12;
  s.normals_ = std::move(normals);
  s.offsets_ = std::move(offsets);
  s.interior_ = std::move(interior);
  return s;
}

std::span<const double> ConvexSet::halfspace_normal(std::size_t k) const {
  return {normals_.data() + k * dim_, static_cast<std::size_t>(dim_)};
}

bool ConvexSet::contains(std::span<const double> y, double tol) const {
  switch (kind_) {
    case Kind::Box:
      for (int i = 0; i < dim_; ++i) {
        if (y[i] < lower_[i] - tol || y[i] > upper_[i] + tol) return false;
      }
      return true;
    case Kind::Ball: {
      double d2 = 0.0;
      for (int i = 0; i < dim_; ++i) d2 += sq(y[i] - center_[i]);
      return std::sqrt(d2) <= radius_ + tol;
    }
    case Kind::Halfspaces:
      for (std::size_t j = 0; j < offsets_.size(); ++j) {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += normals_[j * dim_ + i] * y[i];
        if (s > offsets_[j] + tol) return false;
      }
      return true;
  }
  return false;
}

namespace {

// Solve G lam = rhs by Gaussian elimination with partial pivoting; returns
// false when a pivot collapses.
bool solve_small(std::vector<double>& g, std::vector<double>& lam, int n) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(g[r * n + col]) > std::abs(g[piv * n + col])) piv = r;
    }
    if (std::abs(g[piv * n + col]) < 1e-13) return false;
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(g[piv * n + c], g[col * n + c]);
      std::swap(lam[piv], lam[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = g[r * n + col] / g[col * n + col];
      for (int c = col; c < n; ++c) g[r * n + c] -= f * g[col * n + c];
      lam[r] -= f * lam[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = lam[r];
    for (int c = r + 1; c < n; ++c) s -= g[r * n + c] * lam[c];
    lam[r] = s / g[r * n + r];
  }
  return true;
}

}  // namespace

void ConvexSet::project_halfspaces(std::span<const double> y, std::span<double> out) const {
  const std::size_t k = offsets_.size();
  const int m = dim_;
  std::copy(y.begin(), y.end(), out.begin());
  if (contains(y)) return;

  // Exact KKT path for small systems: the projection is y - N_S^T lam for
  // some active set S of at most m linearly independent rows with lam >= 0.
  // Enumerating candidate active sets gives the projection to machine
  // precision independent of the face geometry.
  if (k <= 16) {
    const double scale = 1.0 + norm(y) + norm_bound_;
    const double tol = 1e-11 * scale;
    double best = std::numeric_limits<double>::max();
    std::vector<double> cand(m), g, lam;
    std::vector<int> members;
    bool found = false;
    const unsigned masks = 1u << k;
    for (unsigned mask = 1; mask < masks; ++mask) {
      const int size = __builtin_popcount(mask);
      if (size > m) continue;
      members.clear();
      for (std::size_t j = 0; j < k; ++j) {
        if (mask & (1u << j)) members.push_back(static_cast<int>(j));
      }
      g.assign(size * size, 0.0);
      lam.assign(size, 0.0);
      for (int a = 0; a < size; ++a) {
        for (int b = 0; b < size; ++b) {
          double dot_ab = 0.0;
          for (int i = 0; i < m; ++i) {
            dot_ab += normals_[members[a] * m + i] * normals_[members[b] * m + i];
          }
          g[a * size + b] = dot_ab;
        }
        double rhs = -offsets_[members[a]];
        for (int i = 0; i < m; ++i) rhs += normals_[members[a] * m + i] * y[i];
        lam[a] = rhs;
      }
      if (!solve_small(g, lam, size)) continue;
      bool nonneg = true;
      for (int a = 0; a < size; ++a) nonneg = nonneg && lam[a] >= -tol;
      if (!nonneg) continue;
      for (int i = 0; i < m; ++i) cand[i] = y[i];
      for (int a = 0; a < size; ++a) {
        for (int i = 0; i < m; ++i) cand[i] -= lam[a] * normals_[members[a] * m + i];
      }
      if (!contains(cand, tol)) continue;
      double d2 = 0.0;
      for (int i = 0; i < m; ++i) d2 += (cand[i] - y[i]) * (cand[i] - y[i]);
      if (d2 < best) {
        best = d2;
        std::copy(cand.begin(), cand.end(), out.begin());
        found = true;
      }
    }
    if (found) return;
  }

  // Dykstra fallback for many halfspaces.  The x-iterate can stall across
  // whole sweeps while the corrections still move, so the stop watches both.
  std::vector<double> corr(k * m, 0.0), prev(m), w(m);
  const ConvexOptions& opt = convex_options();
  const int cap = std::max(1, opt.dykstra_cap_factor * m * static_cast<int>(k));
  for (int sweep = 0; sweep < cap; ++sweep) {
    std::copy(out.begin(), out.end(), prev.begin());
    double corr_change = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      for (int i = 0; i < m; ++i) w[i] = out[i] + corr[j * m + i];
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += normals_[j * m + i] * w[i];
      const double excess = s - offsets_[j];
      if (excess > 0.0) {
        for (int i = 0; i < m; ++i) out[i] = w[i] - excess * normals_[j * m + i];
      } else {
        for (int i = 0; i < m; ++i) out[i] = w[i];
      }
      for (int i = 0; i < m; ++i) {
        const double c_new = w[i] - out[i];
        corr_change = std::max(corr_change, std::abs(c_new - corr[j * m + i]));
        corr[j * m + i] = c_new;
      }
    }
    double change = corr_change;
    for (int i = 0; i < m; ++i) change = std::max(change, std::abs(out[i] - prev[i]));
    if (change < opt.dykstra_tol) break;
  }
}

void ConvexSet::project(std::span<const double> y, std::span<double> out) const {
  switch (kind_) {
    case Kind::Box:
      for (int i = 0; i < dim_; ++i) out[i] = std::clamp(y[i], lower_[i], upper_[i]);
      return;
    case Kind::Ball: {
      double d2 = 0.0;
      for (int i = 0; i < dim_; ++i) d2 += sq(y[i] - center_[i]);
      const double d = std::sqrt(d2);
      if (d <= radius_) {
        std::copy(y.begin(), y.end(), out.begin());
      } else {
        const double scale = radius_ / d;
        for (int i = 0; i < dim_; ++i) out[i] = center_[i] + scale * (y[i] - center_[i]);
      }
      return;
    }
    case Kind::Halfspaces:
      project_halfspaces(y, out);
      return;
  }
}

std::vector<double> ConvexSet::project(std::span<const double> y) const {
  std::vector<double> out(dim_);
  project(y, out);
  return out;
}

double ConvexSet::dist(std::span<const double> y) const {
  switch (kind_) {
    case Kind::Box: {
      double d2 = 0.0;
      for (int i = 0; i < dim_; ++i) {
        const double lo = lower_[i] - y[i];
        const double hi = y[i] - upper_[i];
        d2 += sq(std::max({lo, hi, 0.0}));
      }
      return std::sqrt(d2);
    }
    case Kind::Ball: {
      double d2 = 0.0;
      for (int i = 0; i < dim_; ++i) d2 += sq(y[i] - center_[i]);
      return std::max(0.0, std::sqrt(d2) - radius_);
    }
    case Kind::Halfspaces: {
      if (contains(y)) return 0.0;
      std::vector<double> p(dim_);
      project_halfspaces(y, p);
      double d2 = 0.0;
      for (int i = 0; i < dim_; ++i) d2 += sq(y[i] - p[i]);
      return std::sqrt(d2);
    }
  }
  return 0.0;
}

double ConvexSet::dist_to_boundary(std::span<const double> y) const {
  if (!contains(y)) return 0.0;
  switch (kind_) {
    case Kind::Box: {
      double slack = std::numeric_limits<double>::max();
      for (int i = 0; i < dim_; ++i) {
        slack = std::min({slack, y[i] - lower_[i], upper_[i] - y[i]});
      }
      return std::max(0.0, slack);
    }
    case Kind::Ball: {
      double d2 = 0.0;
      for (int i = 0; i < dim_; ++i) d2 += sq(y[i] - center_[i]);
      return std::max(0.0, radius_ - std::sqrt(d2));
    }
    case Kind::Halfspaces: {
      // with unit normals the boundary distance of an interior point is the
      // minimum constraint slack
      double slack = std::numeric_limits<double>::max();
      for (std::size_t j = 0; j < offsets_.size(); ++j) {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += normals_[j * dim_ + i] * y[i];
        slack = std::min(slack, offsets_[j] - s);
      }
      return std::max(0.0, slack);
    }
  }
  return 0.0;
}

double ConvexSet::support(std::span<const double> dir) const {
  switch (kind_) {
    case Kind::Box: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) s += dir[i] > 0.0 ? upper_[i] * dir[i] : lower_[i] * dir[i];
      return s;
    }
    case Kind::Ball:
      return dot(center_, dir) + radius_ * norm(dir);
    case Kind::Halfspaces: {
      // projected gradient ascent with staged step decay; each stage halves
      // the step so the final iterate sits within O(final step) of the max
      std::vector<double> x = interior_;
      std::vector<double> cand(dim_);
      double eta = 2.0 * std::max(norm_bound_, 1e-12);
      double best = dot(x, dir);
      for (int stage = 0; stage < 44; ++stage) {
        for (int it = 0; it < 6; ++it) {
          for (int i = 0; i < dim_; ++i) cand[i] = x[i] + eta * dir[i];
          if (!contains(cand)) {
            std::vector<double> proj(dim_);
            project_halfspaces(cand, proj);
            cand = proj;
          }
          const double v = dot(cand, dir);
          if (v > best) {
            best = v;
            x = cand;
          }
        }
        eta *= 0.5;
      }
      return best;
    }
  }
  return 0.0;
}

std::vector<double> ConvexSet::interior_point() const {
  switch (kind_) {
    case Kind::Box: {
      std::vector<double> p(dim_);
      for (int i = 0; i < dim_; ++i) p[i] = 0.5 * (lower_[i] + upper_[i]);
      return p;
    }
    case Kind::Ball:
      return center_;
    case Kind::Halfspaces:
      return interior_;
  }
  return {};
}

ConvexSet ConvexSet::shrink(double eps) const {
  if (!(eps > 0.0)) throw ValidationError("shrink margin must be positive", "eps");
  switch (kind_) {
    case Kind::Box: {
      std::vector<double> lo(lower_), hi(upper_);
      for (int i = 0; i < dim_; ++i) {
        lo[i] += eps;
        hi[i] -= eps;
        if (!(lo[i] < hi[i])) {
          throw EmptyInteriorError("box shrink by " + std::to_string(eps) +
                                   " has empty interior");
        }
      }
      return box(std::move(lo), std::move(hi));
    }
    case Kind::Ball: {
      const double r = radius_ - eps;
      if (!(r > 0.0)) {
        throw EmptyInteriorError("ball shrink by " + std::to_string(eps) +
                                 " has empty interior");
      }
      return ball(center_, r);
    }
    case Kind::Halfspaces: {
      std::vector<double> offs(offsets_);
      for (double& b : offs) b -= eps;
      // search for a point with slack > eps in the original set: subgradient
      // ascent on the min-slack function from the certified interior point
      const std::size_t k = offsets_.size();
      std::vector<double> x = interior_;

      auto min_slack = [&](const std::vector<double>& p) {
        double s = std::numeric_limits<double>::max();
        for (std::size_t j = 0; j < k; ++j) {
          double v = offsets_[j];
          for (int i = 0; i < dim_; ++i) v -= normals_[j * dim_ + i] * p[i];
          s = std::min(s, v);
        }
        return s;
      };

      double g = min_slack(x);
      std::vector<double> dir(dim_), cand(dim_);
      for (int it = 0; it < 500 && g <= eps * (1.0 + 1e-9); ++it) {
        // ascend along minus the average of the near-active normals
        const double band = g + 0.05 * (std::abs(g) + eps);
        std::fill(dir.begin(), dir.end(), 0.0);
        for (std::size_t j = 0; j < k; ++j) {
          double v = offsets_[j];
          for (int i = 0; i < dim_; ++i) v -= normals_[j * dim_ + i] * x[i];
          if (v <= band) {
            for (int i = 0; i < dim_; ++i) dir[i] -= normals_[j * dim_ + i];
          }
        }
        const double len = norm(dir);
        if (len < 1e-14) break;
        for (double& v : dir) v /= len;
        double step = std::max(norm_bound_, 1.0);
        bool improved = false;
        for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
          for (int i = 0; i < dim_; ++i) cand[i] = x[i] + step * dir[i];
          const double gc = min_slack(cand);
          if (gc > g + 1e-15) {
            x = cand;
            g = gc;
            improved = true;
            break;
          }
        }
        if (!improved) break;
      }
      if (!(g > eps)) {
        throw EmptyInteriorError("halfspace shrink by " + std::to_string(eps) +
                                 " has empty interior");
      }
      return halfspaces(normals_, std::move(offs), std::move(x));
    }
  }
  throw Error("unreachable");
}

namespace {

double point_box_dist(std::span<const double> y, const ConvexSet& b) {
  double d2 = 0.0;
  auto lo = b.box_lower();
  auto hi = b.box_upper();
  for (std::size_t i = 0; i < y.size(); ++i) {
    d2 += sq(std::max({lo[i] - y[i], y[i] - hi[i], 0.0}));
  }
  return std::sqrt(d2);
}

double box_box_hausdorff(const ConvexSet& d, const ConvexSet& g) {
  const int m = d.dim();
  // dist(., other box) is convex, so its max over a box sits at a vertex
  auto one_side = [m](const ConvexSet& from, const ConvexSet& to) {
    double worst = 0.0;
    std::vector<double> v(m);
    const std::size_t corners = std::size_t{1} << m;
    for (std::size_t mask = 0; mask < corners; ++mask) {
      for (int i = 0; i < m; ++i) {
        v[i] = (mask >> i) & 1 ? from.box_upper()[i] : from.box_lower()[i];
      }
      worst = std::max(worst, point_box_dist(v, to));
    }
    return worst;
  };
  return std::max(one_side(d, g), one_side(g, d));
}

double covering_radius(int dim, std::size_t n) {
  if (dim <= 1) return 0.0;
  if (dim == 2) return 2.0 * std::sin(kPi / (2.0 * static_cast<double>(n)));
  if (dim == 3) return 2.4 / std::sqrt(static_cast<double>(n));  // empirical
  return 2.0 * std::pow(static_cast<double>(n), -1.0 / (dim - 1));
}

}  // namespace

std::vector<double> sphere_directions(int dim, std::size_t count) {
  std::vector<double> dirs;
  if (dim == 1) {
    dirs = {1.0, -1.0};
    return dirs;
  }
  dirs.reserve(count * dim);
  if (dim == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      const double a = 2.0 * kPi * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
      dirs.push_back(std::cos(a));
      dirs.push_back(std::sin(a));
    }
    return dirs;
  }
  if (dim == 3) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * static_cast<double>(i);
      dirs.push_back(r * std::cos(a));
      dirs.push_back(r * std::sin(a));
      dirs.push_back(z);
    }
    return dirs;
  }
  std::uint64_t state = 0x5DEECE66Dull ^ static_cast<std::uint64_t>(dim);
  NormalSampler normal(splitmix64(state));
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < count; ++i) {
    double n2 = 0.0;
    for (int j = 0; j < dim; ++j) {
      v[j] = normal();
      n2 += sq(v[j]);
    }
    const double len = std::sqrt(n2);
    for (int j = 0; j < dim; ++j) dirs.push_back(v[j] / len);
  }
  return dirs;
}

static HausdorffResult hausdorff_sampled(const ConvexSet& d, const ConvexSet& g) {
  const int m = d.dim();
  const std::size_t n_dir =
      static_cast<std::size_t>(convex_options().hausdorff_dirs_per_dim) * m;
  const std::vector<double> dirs = sphere_directions(m, n_dir);
  const std::size_t count = dirs.size() / m;
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    std::span<const double> dir{dirs.data() + i * m, static_cast<std::size_t>(m)};
    worst = std::max(worst, std::abs(d.support(dir) - g.support(dir)));
  }
  HausdorffResult out;
  out.value = worst;
  out.exact = false;
  // support functions are Lipschitz on the sphere with constant sup|x|
  out.error_bound = (d.norm_bound() + g.norm_bound()) * covering_radius(m, count);
  return out;
}

HausdorffResult hausdorff_with_bound(const ConvexSet& d, const ConvexSet& g) {
  if (d.dim() != g.dim()) throw ValidationError("hausdorff requires equal dimensions", "dim");
  HausdorffResult out;
  if (d.kind() == ConvexSet::Kind::Ball && g.kind() == ConvexSet::Kind::Ball) {
    double c2 = 0.0;
    for (int i = 0; i < d.dim(); ++i) c2 += sq(d.ball_center()[i] - g.ball_center()[i]);
    out.value = std::sqrt(c2) + std::abs(d.ball_radius() - g.ball_radius());
    return out;
  }
  if (d.kind() == ConvexSet::Kind::Box && g.kind() == ConvexSet::Kind::Box) {
    out.value = box_box_hausdorff(d, g);
    return out;
  }
  return hausdorff_sampled(d, g);
}

double hausdorff(const ConvexSet& d, const ConvexSet& g) {
  return hausdorff_with_bound(d, g).value;
}

}  // namespace pvi
