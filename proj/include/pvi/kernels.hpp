#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pvi {

/// Sparse symmetric matrix in CSR form.  Rows/columns index the packed
/// interior unknowns of one scalar component.
struct Csr {
  std::size_t rows = 0;
  std::vector<int> row_ptr;   // rows+1
  std::vector<int> col;
  std::vector<double> val;

  std::size_t nnz() const { return val.size(); }
};

// y = A x.  The parallel version splits rows across threads; each output row
// is written by exactly one thread, so the result is bitwise independent of
// the thread count.
void csr_apply(const Csr& a, const double* x, double* y);
void csr_apply_serial(const Csr& a, const double* x, double* y);

// Reductions use a fixed block decomposition (block size independent of the
// thread count) with serial combination of the per-block partial sums, so
// parallel and serial results are bitwise identical.
double blocked_dot(std::span<const double> a, std::span<const double> b);
double blocked_dot_serial(std::span<const double> a, std::span<const double> b);
double blocked_sum_abs(std::span<const double> a);
double blocked_sum_abs_serial(std::span<const double> a);

}  // namespace pvi
