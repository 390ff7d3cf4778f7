#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pvi {

// Hard caps used to size stack buffers in hot loops.
inline constexpr int kMaxDim = 2;
inline constexpr int kMaxComponents = 8;

/// Worker count for parallel kernels: PVI_NUM_THREADS if set, else the
/// OpenMP default.  Always 1 without OpenMP.
int max_threads();

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double max_abs(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

}  // namespace pvi
