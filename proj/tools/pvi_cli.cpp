#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "pvi/errors.hpp"
#include "pvi/harness.hpp"

namespace {

int run_subcommand(const std::string& sub, const std::string& config_path,
                   const std::string& out_dir, std::uint64_t seed, const std::string& format) {
  using namespace pvi;
  const ScenarioConfig cfg =
      sub == "verify" ? ScenarioConfig{} : parse_config(config_path);
  RunResult result = run(cfg, sub, out_dir, seed);
  if (sub == "verify" && !config_path.empty()) {
    // verify reloads the stored run; a supplied config must match it
    const ScenarioConfig given = parse_config(config_path);
    if (given.hash() != result.config_hash) {
      throw ValidationError("supplied config does not match the stored result", "config");
    }
  }
  const auto files = emit(result, format, out_dir);
  if (format == "csv" && sub != "verify") {
    // keep a JSON mirror alongside so `verify` can reload the run
    emit(result, "json", out_dir);
  }
  std::printf("scenario %s  subcommand %s  config %016llx  result %016llx\n",
              result.scenario.c_str(), result.subcommand.c_str(),
              static_cast<unsigned long long>(result.config_hash),
              static_cast<unsigned long long>(result.result_hash));
  for (const CheckResult& c : result.checks) {
    std::printf("  [%s] %-32s value %.6g  tol %.6g%s\n",
                !c.applicable ? " n/a" : (c.pass ? "pass" : "FAIL"), c.name.c_str(), c.value,
                c.tolerance, !c.applicable ? "" : "");
  }
  for (const auto& f : files) std::printf("  wrote %s\n", f.c_str());
  return result.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"penalized solver for systems of parabolic variational inequalities "
               "with time-dependent convex obstacles"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::string format = "csv";

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path,
                                "scenario config path or builtin:<name>");
    if (config_required) opt->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "seed override (0 keeps the config seed)");
    sub->add_option("--format", format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  add_common(app.add_subcommand("solve", "solve one penalty rung"), true);
  add_common(app.add_subcommand("ladder", "run the penalty ladder with diagnostics"), true);
  add_common(app.add_subcommand("verify",
                                "re-run minimality/energy checks on a stored result"),
             false);
  add_common(app.add_subcommand("mc-check", "Feynman-Kac Monte Carlo cross-check"), true);

  CLI11_PARSE(app, argc, argv);

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    return run_subcommand(sub, config_path, out_dir, seed, format);
  } catch (const pvi::ParseError& e) {
    std::fprintf(stderr, "parse error (line %zu): %s\n", e.line, e.what());
  } catch (const pvi::ValidationError& e) {
    std::fprintf(stderr, "validation error (%s): %s\n", e.field.c_str(), e.what());
  } catch (const pvi::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
  }
  return 2;
}
