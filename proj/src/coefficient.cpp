#include "pvi/coefficient.hpp"

#include <cmath>

#include "pvi/errors.hpp"

namespace pvi {

CoefficientField CoefficientField::constant(SymMat a, double lambda, int dim) {
  return CoefficientField([a](double, std::span<const double>) { return a; }, lambda, dim);
}

SymMat sym_sqrt(const SymMat& a, int dim) {
  SymMat s;
  if (dim == 1) {
    s.a11 = std::sqrt(a.a11);
    s.a22 = 0.0;
    return s;
  }
  const double det = a.a11 * a.a22 - a.a12 * a.a12;
  const double tr = a.a11 + a.a22;
  const double sd = std::sqrt(det);
  const double t = std::sqrt(tr + 2.0 * sd);
  s.a11 = (a.a11 + sd) / t;
  s.a22 = (a.a22 + sd) / t;
  s.a12 = a.a12 / t;
  return s;
}

SymMat CoefficientField::sqrt_at(double t, std::span<const double> x) const {
  return sym_sqrt(eval_(t, x), dim_);
}

bool CoefficientField::check_ellipticity(double t, std::span<const double> x, double tol) const {
  const SymMat a = eval_(t, x);
  auto quad = [&](double y0, double y1) {
    return a.a11 * y0 * y0 + 2.0 * a.a12 * y0 * y1 + a.a22 * y1 * y1;
  };
  const double lo = (1.0 / lambda_) * (1.0 - tol);
  const double hi = lambda_ * (1.0 + tol);
  if (dim_ == 1) {
    return a.a11 >= lo && a.a11 <= hi;
  }
  const double probes[4][2] = {{1.0, 0.0}, {0.0, 1.0}, {M_SQRT1_2, M_SQRT1_2},
                               {M_SQRT1_2, -M_SQRT1_2}};
  for (const auto& p : probes) {
    const double q = quad(p[0], p[1]);
    if (q < lo || q > hi) return false;
  }
  return true;
}

}  // namespace pvi
