#include "pvi/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "pvi/common.hpp"

#ifdef PVI_OPENMP
#include <omp.h>
#endif

namespace pvi {

int max_threads() {
#ifdef PVI_OPENMP
  if (const char* env = std::getenv("PVI_NUM_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void csr_apply_serial(const Csr& a, const double* x, double* y) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    double s = 0.0;
    for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      s += a.val[k] * x[a.col[k]];
    }
    y[r] = s;
  }
}

void csr_apply(const Csr& a, const double* x, double* y) {
#ifdef PVI_OPENMP
  if (a.rows < 8192) {
    csr_apply_serial(a, x, y);
    return;
  }
  const int nt = max_threads();
#pragma omp parallel for num_threads(nt) schedule(static)
  for (std::size_t r = 0; r < a.rows; ++r) {
    double s = 0.0;
    for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      s += a.val[k] * x[a.col[k]];
    }
    y[r] = s;
  }
#else
  csr_apply_serial(a, x, y);
#endif
}

namespace {

constexpr std::size_t kBlock = 2048;

template <typename F>
double blocked_reduce_serial(std::size_t n, F&& block_sum) {
  const std::size_t nb = (n + kBlock - 1) / kBlock;
  double total = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    total += block_sum(b * kBlock, std::min(n, (b + 1) * kBlock));
  }
  return total;
}

template <typename F>
double blocked_reduce(std::size_t n, F&& block_sum) {
#ifdef PVI_OPENMP
  const std::size_t nb = (n + kBlock - 1) / kBlock;
  if (nb < 4) return blocked_reduce_serial(n, block_sum);
  std::vector<double> partial(nb);
  const int nt = max_threads();
#pragma omp parallel for num_threads(nt) schedule(static)
  for (std::size_t b = 0; b < nb; ++b) {
    partial[b] = block_sum(b * kBlock, std::min(n, (b + 1) * kBlock));
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
#else
  return blocked_reduce_serial(n, block_sum);
#endif
}

}  // namespace

double blocked_dot_serial(std::span<const double> a, std::span<const double> b) {
  return blocked_reduce_serial(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    return s;
  });
}

double blocked_dot(std::span<const double> a, std::span<const double> b) {
  return blocked_reduce(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    return s;
  });
}

double blocked_sum_abs_serial(std::span<const double> a) {
  return blocked_reduce_serial(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += std::abs(a[i]);
    return s;
  });
}

double blocked_sum_abs(std::span<const double> a) {
  return blocked_reduce(a.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += std::abs(a[i]);
    return s;
  });
}

}  // namespace pvi
