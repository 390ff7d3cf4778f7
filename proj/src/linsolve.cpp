#include "pvi/linsolve.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "pvi/common.hpp"
#include "pvi/errors.hpp"

namespace pvi {

namespace {

// Thomas algorithm for (diag, sub, sup) systems; bands already shifted.
void tridiag_solve(std::vector<double>& sub, std::vector<double>& diag, std::vector<double>& sup,
                   std::span<const double> rhs, std::span<double> v) {
  const std::size_t n = diag.size();
  std::vector<double> c(n), d(n);
  c[0] = sup[0] / diag[0];
  d[0] = rhs[0] / diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double m = diag[i] - sub[i] * c[i - 1];
    c[i] = sup[i] / m;
    d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
  }
  v[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    v[i] = d[i] - c[i] * v[i + 1];
  }
}

// CG on matvec y = x - c*Ax (SPD for c >= 0 since A is negative semidefinite).
LinearSolveReport cg_shifted(const DiscreteOperator& op, double c, std::span<const double> rhs,
                             std::span<double> v, const LinearSolveOptions& opt) {
  const std::size_t n = rhs.size();
  std::vector<double> r(n), p(n), ap(n), tmp(n);
  auto matvec = [&](std::span<const double> x, std::span<double> y) {
    op.apply(x, tmp);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - c * tmp[i];
  };
  matvec(v, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
  const double b_norm = std::sqrt(blocked_dot(rhs, rhs));
  const double tol = opt.cg_tol * std::max(b_norm, 1e-300);
  double rr = blocked_dot(r, r);
  LinearSolveReport rep;
  rep.residual = std::sqrt(rr);
  if (rep.residual <= tol) return rep;
  p.assign(r.begin(), r.end());
  const int cap = opt.cg_cap_factor * static_cast<int>(n);
  for (int it = 0; it < cap; ++it) {
    matvec(p, ap);
    const double pap = blocked_dot(p, ap);
    const double alpha = rr / pap;
    for (std::size_t i = 0; i < n; ++i) v[i] += alpha * p[i];
    for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * ap[i];
    const double rr_new = blocked_dot(r, r);
    rep.iterations = it + 1;
    rep.residual = std::sqrt(rr_new);
    if (rep.residual <= tol) return rep;
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  throw SolverDivergedError("conjugate gradient exceeded " + std::to_string(cap) +
                            " iterations, residual " + std::to_string(rep.residual));
}

}  // namespace

LinearSolveReport solve_shifted(const DiscreteOperator& op, double c,
                                std::span<const double> rhs, std::span<double> v,
                                const LinearSolveOptions& opt) {
  const std::size_t n = rhs.size();
  if (op.tridiagonal()) {
    std::vector<double> sub(n), diag(n), sup(n);
    op.bands(sub, diag, sup);
    for (std::size_t i = 0; i < n; ++i) {
      sub[i] = -c * sub[i];
      sup[i] = -c * sup[i];
      diag[i] = 1.0 - c * diag[i];
    }
    tridiag_solve(sub, diag, sup, rhs, v);
    return {0, 0.0};
  }
  return cg_shifted(op, c, rhs, v, opt);
}

LinearSolveReport solve_stationary(const DiscreteOperator& op, std::span<const double> b,
                                   std::span<double> u, const LinearSolveOptions& opt) {
  const std::size_t n = b.size();
  if (op.tridiagonal()) {
    std::vector<double> sub(n), diag(n), sup(n);
    op.bands(sub, diag, sup);
    for (std::size_t i = 0; i < n; ++i) {
      sub[i] = -sub[i];
      sup[i] = -sup[i];
      diag[i] = -diag[i];
    }
    tridiag_solve(sub, diag, sup, b, u);
    return {0, 0.0};
  }
  // CG on -A
  std::vector<double> r(n), p(n), ap(n), tmp(n);
  auto matvec = [&](std::span<const double> x, std::span<double> y) {
    op.apply(x, tmp);
    for (std::size_t i = 0; i < n; ++i) y[i] = -tmp[i];
  };
  std::fill(u.begin(), u.end(), 0.0);
  r.assign(b.begin(), b.end());
  double rr = blocked_dot(r, r);
  const double tol = opt.cg_tol * std::max(std::sqrt(rr), 1e-300);
  LinearSolveReport rep;
  rep.residual = std::sqrt(rr);
  if (rep.residual <= tol) return rep;
  p.assign(r.begin(), r.end());
  const int cap = opt.cg_cap_factor * static_cast<int>(n);
  for (int it = 0; it < cap; ++it) {
    matvec(p, ap);
    const double alpha = rr / blocked_dot(p, ap);
    for (std::size_t i = 0; i < n; ++i) u[i] += alpha * p[i];
    for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * ap[i];
    const double rr_new = blocked_dot(r, r);
    rep.iterations = it + 1;
    rep.residual = std::sqrt(rr_new);
    if (rep.residual <= tol) return rep;
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  throw SolverDivergedError("stationary CG exceeded its iteration cap");
}

}  // namespace pvi
