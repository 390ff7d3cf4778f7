#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pvi/checks.hpp"
#include "pvi/config.hpp"
#include "pvi/feynman_kac.hpp"
#include "pvi/solver.hpp"

namespace pvi {

inline constexpr const char* kVersion = "0.1.0";

struct CheckResult {
  std::string name;
  bool applicable = true;
  bool pass = true;
  double value = 0.0;
  double tolerance = 0.0;
};

/// Complete outcome of one harness invocation.  Every number ties back to a
/// named check; wall times are excluded from the result hash.
struct RunResult {
  std::string scenario;
  std::string subcommand;
  std::string config_text;  // resolved config, defaults materialized
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string version = kVersion;

  SolutionField u;          // finest-rung solution
  ReactionMeasureField mu;  // its reaction density
  std::vector<LadderRung> rungs;
  std::vector<FKEstimate> fk;
  std::vector<CheckResult> checks;

  double wall_ms_total = 0.0;
  std::uint64_t result_hash = 0;  // over the deterministic content

  bool all_pass() const;
};

/// Hash of the deterministic content (config, fields, rung metrics minus
/// wall time, fk table, check outcomes).
std::uint64_t hash_result(const RunResult& r);

/// Execute a subcommand: solve (single rung), ladder, verify (re-check a
/// stored result in out_dir), mc-check.  `seed_override` of 0 keeps the
/// config seed.
RunResult run(const ScenarioConfig& cfg, const std::string& subcommand,
              const std::string& out_dir, std::uint64_t seed_override = 0);

/// Write result files; format is "csv" (one file per field) or "json"
/// (single result.json mirroring RunResult).  Returns the emitted paths.
std::vector<std::string> emit(const RunResult& r, const std::string& format,
                              const std::string& out_dir);

/// Reload a result.json produced by emit.
RunResult load_result(const std::string& path);

}  // namespace pvi
