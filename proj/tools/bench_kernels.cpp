// Timing comparison of the OpenMP kernels against their serial reference
// implementations: CSR apply, blocked reductions, penalty sweep, MC paths.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "pvi/coefficient.hpp"
#include "pvi/common.hpp"
#include "pvi/convex_set.hpp"
#include "pvi/grid.hpp"
#include "pvi/kernels.hpp"
#include "pvi/obstacle.hpp"
#include "pvi/operator.hpp"
#include "pvi/pathsim.hpp"

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_ms(int reps, F&& fn) {
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-18s serial %10.3f ms   parallel %10.3f ms   speedup %5.2fx\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
  std::printf("kernel benchmark, %d worker thread(s)\n", pvi::max_threads());

  // CSR apply on a 2d operator
  {
    const auto grid = pvi::SpatialGrid::rectangle(1.0, 1.0, 257, 257);
    const auto coeff = pvi::CoefficientField::constant({1.0, 1.0, 0.2}, 2.0, 2);
    const auto op = pvi::DiscreteOperator::assemble(coeff, grid, 0.0);
    std::vector<double> x(grid.interior_nodes(), 1.0), y(grid.interior_nodes());
    const double ts = time_ms(20, [&] { pvi::csr_apply_serial(op.matrix(), x.data(), y.data()); });
    const double tp = time_ms(20, [&] { pvi::csr_apply(op.matrix(), x.data(), y.data()); });
    report("csr_apply", ts, tp);
  }

  // blocked dot product
  {
    std::vector<double> a(1 << 22), b(1 << 22);
    std::mt19937_64 rng(7);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = static_cast<double>(rng()) * 0x1.0p-64;
      b[i] = static_cast<double>(rng()) * 0x1.0p-64;
    }
    volatile double sink = 0.0;
    const double ts = time_ms(20, [&] { sink = pvi::blocked_dot_serial(a, b); });
    const double tp = time_ms(20, [&] { sink = pvi::blocked_dot(a, b); });
    (void)sink;
    report("blocked_dot", ts, tp);
  }

  // penalty sweep over ball obstacles
  {
    const int m = 2;
    const std::size_t nodes = 1 << 18;
    std::vector<pvi::ConvexSet> sets;
    sets.push_back(pvi::ConvexSet::ball({0.0, 0.0}, 0.5));
    const pvi::ObstacleSlice slice(std::move(sets), true);
    std::vector<double> v(nodes * m), proj(nodes * m), dens(nodes * m);
    std::mt19937_64 rng(9);
    for (double& x : v) x = 2.0 * (static_cast<double>(rng()) * 0x1.0p-64) - 1.0;
    const double ts =
        time_ms(20, [&] { pvi::penalty_sweep_serial(slice, v, m, 64.0, proj, dens); });
    const double tp = time_ms(20, [&] { pvi::penalty_sweep(slice, v, m, 64.0, proj, dens); });
    report("penalty_sweep", ts, tp);
  }

  // Euler-Maruyama path batch
  {
    const auto grid = pvi::SpatialGrid::line(1.0, 33);
    const auto coeff = pvi::CoefficientField::constant({1.0, 0.0, 0.0}, 1.0, 1);
    const double ts = time_ms(3, [&] {
      pvi::simulate_paths_serial(grid, coeff, 0.0, {0.5, 0.0}, 1.0, 20000, 1e-3, 42);
    });
    const double tp = time_ms(3, [&] {
      pvi::simulate_paths(grid, coeff, 0.0, {0.5, 0.0}, 1.0, 20000, 1e-3, 42);
    });
    report("mc_paths", ts, tp);
  }

  return 0;
}
