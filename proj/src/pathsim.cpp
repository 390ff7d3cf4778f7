#include "pvi/pathsim.hpp"

#include <cmath>

#include "pvi/common.hpp"
#include "pvi/errors.hpp"
#include "pvi/rng.hpp"

#ifdef PVI_OPENMP
#include <omp.h>
#endif

namespace pvi {

namespace {

struct WalkResult {
  PathRecord record;
  std::vector<double> trajectory;
};

WalkResult walk_one(const SpatialGrid& grid, const CoefficientField& coeff, double start_time,
                    const std::array<double, 2>& start, double horizon, double dt,
                    std::uint64_t path_seed, bool store) {
  WalkResult out;
  const int d = grid.dim();
  NormalSampler rng(path_seed);
  double pos[kMaxDim] = {start[0], start[1]};
  double t = start_time;
  if (store) {
    for (int a = 0; a < d; ++a) out.trajectory.push_back(pos[a]);
  }
  while (t < horizon - 1e-14) {
    const double step = std::min(dt, horizon - t);
    const SymMat s = coeff.sqrt_at(t, {pos, static_cast<std::size_t>(d)});
    const double sdt = std::sqrt(step);
    double db[kMaxDim];
    for (int a = 0; a < d; ++a) db[a] = sdt * rng();
    double next[kMaxDim];
    if (d == 1) {
      next[0] = pos[0] + s.a11 * db[0];
    } else {
      next[0] = pos[0] + s.a11 * db[0] + s.a12 * db[1];
      next[1] = pos[1] + s.a12 * db[0] + s.a22 * db[1];
    }
    t += step;
    if (store) {
      for (int a = 0; a < d; ++a) out.trajectory.push_back(next[a]);
    }
    if (!grid.point_inside({next, static_cast<std::size_t>(d)})) {
      out.record.boundary_exit = true;
      out.record.exit_time = t;
      out.record.exit_pos = {next[0], d == 2 ? next[1] : 0.0};
      return out;
    }
    for (int a = 0; a < d; ++a) pos[a] = next[a];
  }
  out.record.boundary_exit = false;
  out.record.exit_time = horizon;
  out.record.exit_pos = {pos[0], d == 2 ? pos[1] : 0.0};
  return out;
}

PathBatch simulate_impl(const SpatialGrid& grid, const CoefficientField& coeff, double start_time,
                        std::array<double, 2> start, double horizon, std::size_t n_paths,
                        double dt, std::uint64_t seed, bool store, bool parallel) {
  if (!(dt > 0.0)) throw ValidationError("path step must be positive", "mc.dt");
  if (!grid.point_inside({start.data(), static_cast<std::size_t>(grid.dim())})) {
    throw ValidationError("path start must be an interior point", "mc.start");
  }
  PathBatch batch;
  batch.start_time = start_time;
  batch.start = start;
  batch.dt = dt;
  batch.horizon = horizon;
  batch.seed = seed;
  batch.paths.resize(n_paths);
  if (store) batch.trajectories.resize(n_paths);

#ifdef PVI_OPENMP
  if (parallel) {
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (std::size_t j = 0; j < n_paths; ++j) {
      WalkResult r =
          walk_one(grid, coeff, start_time, start, horizon, dt, derive_seed(seed, j), store);
      batch.paths[j] = r.record;
      if (store) batch.trajectories[j] = std::move(r.trajectory);
    }
    return batch;
  }
#else
  (void)parallel;
#endif
  for (std::size_t j = 0; j < n_paths; ++j) {
    WalkResult r =
        walk_one(grid, coeff, start_time, start, horizon, dt, derive_seed(seed, j), store);
    batch.paths[j] = r.record;
    if (store) batch.trajectories[j] = std::move(r.trajectory);
  }
  return batch;
}

}  // namespace

PathBatch simulate_paths(const SpatialGrid& grid, const CoefficientField& coeff,
                         double start_time, std::array<double, 2> start, double horizon,
                         std::size_t n_paths, double dt, std::uint64_t seed,
                         bool store_trajectories) {
  return simulate_impl(grid, coeff, start_time, start, horizon, n_paths, dt, seed,
                       store_trajectories, true);
}

PathBatch simulate_paths_serial(const SpatialGrid& grid, const CoefficientField& coeff,
                                double start_time, std::array<double, 2> start, double horizon,
                                std::size_t n_paths, double dt, std::uint64_t seed,
                                bool store_trajectories) {
  return simulate_impl(grid, coeff, start_time, start, horizon, n_paths, dt, seed,
                       store_trajectories, false);
}

PathBatch::Stats PathBatch::exit_time_stats() const {
  Stats st;
  const std::size_t n = paths.size();
  if (n == 0) return st;
  double sum = 0.0;
  for (const PathRecord& p : paths) sum += p.exit_time - start_time;
  const double mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (const PathRecord& p : paths) {
    const double t = p.exit_time - start_time;
    var += (t - mean) * (t - mean);
  }
  var /= std::max<std::size_t>(1, n - 1);
  st.mean = mean;
  st.std_error = std::sqrt(var / static_cast<double>(n));
  return st;
}

double PathBatch::boundary_exit_fraction() const {
  if (paths.empty()) return 0.0;
  std::size_t k = 0;
  for (const PathRecord& p : paths) k += p.boundary_exit ? 1 : 0;
  return static_cast<double>(k) / static_cast<double>(paths.size());
}

}  // namespace pvi
