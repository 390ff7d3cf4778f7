#include "pvi/harness.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pvi/common.hpp"
#include "pvi/errors.hpp"

namespace pvi {

namespace fs = std::filesystem;
using nlohmann::json;

bool RunResult::all_pass() const {
  for (const CheckResult& c : checks) {
    if (c.applicable && !c.pass) return false;
  }
  return true;
}

namespace {

void feed(std::uint64_t& h, const std::string& s) { h = fnv1a(h, s.data(), s.size()); }
void feed(std::uint64_t& h, double v) { h = fnv1a(h, &v, sizeof(v)); }
void feed(std::uint64_t& h, std::span<const double> v) {
  h = fnv1a(h, v.data(), v.size() * sizeof(double));
}
void feed(std::uint64_t& h, bool b) {
  const unsigned char c = b ? 1 : 0;
  h = fnv1a(h, &c, 1);
}

}  // namespace

std::uint64_t hash_result(const RunResult& r) {
  std::uint64_t h = fnv1a_init();
  feed(h, r.config_text);
  feed(h, r.subcommand);
  feed(h, r.u.data());
  feed(h, r.mu.data());
  for (const LadderRung& g : r.rungs) {
    feed(h, g.penalty);
    feed(h, g.sup_l2_sq);
    feed(h, g.grad_int);
    feed(h, g.dist_l2);
    feed(h, g.diff_l2);
    feed(h, g.diff_grad_sq);
    feed(h, g.tv);
    feed(h, g.min_residual);
    feed(h, g.vi_residual);
    feed(h, static_cast<double>(g.picard_iterations_max));
    feed(h, static_cast<double>(g.dt_halvings));
  }
  for (const FKEstimate& e : r.fk) {
    feed(h, static_cast<double>(e.component));
    feed(h, static_cast<double>(e.time_step));
    feed(h, static_cast<double>(e.node));
    feed(h, e.estimate);
    feed(h, e.std_error);
    feed(h, e.grid_value);
    feed(h, e.band);
    feed(h, e.pass);
  }
  for (const CheckResult& c : r.checks) {
    feed(h, c.name);
    feed(h, c.applicable);
    feed(h, c.pass);
    feed(h, c.value);
    feed(h, c.tolerance);
  }
  return h;
}

namespace {

void add_check(RunResult& r, const std::string& name, bool pass, double value, double tol,
               bool applicable = true) {
  r.checks.push_back({name, applicable, pass, value, tol});
}

// deterministic sample of interior space-time nodes for the MC cross-check
std::vector<std::pair<int, std::size_t>> mc_sample(const ScenarioSpec& s, const McConfig& mc) {
  std::vector<std::pair<int, std::size_t>> out;
  const std::size_t ni = s.grid.interior_nodes();
  const std::size_t per_frac =
      std::max<std::size_t>(1, (mc.nodes + mc.time_fractions.size() - 1) /
                                   std::max<std::size_t>(1, mc.time_fractions.size()));
  for (double f : mc.time_fractions) {
    int k = static_cast<int>(std::lround(f * s.n_steps));
    k = std::max(0, std::min(s.n_steps - 1, k));
    const std::size_t stride = std::max<std::size_t>(1, ni / per_frac);
    for (std::size_t i = stride / 2; i < ni && out.size() < static_cast<std::size_t>(mc.nodes);
         i += stride) {
      out.emplace_back(k, s.grid.node_of_interior(i));
    }
  }
  return out;
}

LadderRung single_rung_metrics(const ScenarioSpec& spec, double penalty,
                               const PenaltySolveResult& sol) {
  LadderRung row;
  row.penalty = penalty;
  const auto [sup_l2, grad_int] = energy_norms(sol.u);
  row.sup_l2_sq = sup_l2;
  row.grad_int = grad_int;
  row.dist_l2 = feasibility_l2(spec, sol.u);
  row.tv = sol.mu.total_variation();
  const AdmissibleCheckSummary checks = run_admissible_checks(spec, sol.u, sol.mu);
  row.min_residual = checks.min_residual_max;
  row.vi_residual = checks.vi_residual_max;
  row.picard_iterations_max = sol.picard_iterations_max;
  row.dt_halvings = sol.dt_halvings;
  return row;
}

void obstacle_validation_checks(RunResult& r, const ScenarioSpec& spec,
                                const ScenarioConfig& cfg) {
  const ContinuityReport d1 = validate_continuity(spec.obstacle, spec.grid, spec.horizon, spec.n_steps);
  add_check(r, "obstacle_uniform_bound", d1.uniform_bound_ok, d1.worst_radius,
            spec.obstacle.uniform_radius());
  // the modulus is informational: finite and recorded
  add_check(r, "obstacle_continuity_modulus", std::isfinite(d1.max_adjacent_rho),
            d1.max_adjacent_rho, 0.0);
  if (spec.witness.has_value()) {
    const SeparationWitness w =
        spec.witness->materialize(spec.grid, spec.n_steps, spec.horizon, spec.components);
    const WitnessReport rep =
        validate_separation(spec.obstacle, w, spec.coefficient, cfg.tol.witness_residual_tol);
    add_check(r, "witness_margin", rep.worst_margin >= 0.0, rep.worst_margin, 0.0);
    add_check(r, "witness_residual", rep.max_pde_residual <= cfg.tol.witness_residual_tol,
              rep.max_pde_residual, cfg.tol.witness_residual_tol);
  }
}

void ladder_checks(RunResult& r, const ScenarioSpec& spec, const LadderResult& lr) {
  const ConvergenceReport& rep = lr.report;
  add_check(r, "feasibility", rep.feasibility_ok, rep.rungs.back().dist_l2, spec.tol_feas());
  double worst_ratio = 0.0;
  const double floor = 1e3 * spec.tol.tol_picard * std::sqrt(spec.energy_scale());
  for (std::size_t j = 1; j + 1 < rep.rungs.size(); ++j) {
    const double d0 = rep.rungs[j].diff_l2;
    const double d1 = rep.rungs[j + 1].diff_l2;
    if (d1 > floor && d0 > 0.0) worst_ratio = std::max(worst_ratio, d1 / d0);
  }
  add_check(r, "cauchy_decay", rep.cauchy_ok, worst_ratio, 1.5);
  double min_res = 0.0, vi_res = 0.0;
  for (const LadderRung& g : rep.rungs) {
    min_res = std::max(min_res, g.min_residual);
    vi_res = std::max(vi_res, g.vi_residual);
  }
  add_check(r, "minimality_residual", min_res <= spec.tol_min(), min_res, spec.tol_min());
  add_check(r, "vi_residual", vi_res <= spec.tol_vi(), vi_res, spec.tol_vi());
  const EnergyBoundReport eb = check_energy_bound(spec, rep.rungs);
  add_check(r, "energy_trace_bound", eb.energy_ok, eb.energy_max,
            2.0 * eb.energy_median);
  add_check(r, "tv_trace_bound", eb.tv_ok, eb.tv_max, 2.0 * eb.tv_median);
}

void no_contact_checks(RunResult& r, const ScenarioSpec& spec, const PenaltySolveResult& finest) {
  // applicable only when the measure is empty at the finest rung
  const double tv = finest.mu.total_variation();
  const bool applicable = tv < spec.tol_feas();
  double gap = 0.0;
  if (applicable) {
    ScenarioSpec unconstrained = spec;
    const PenaltySolveResult base = solve_penalized(unconstrained, 0.0);
    gap = max_abs_diff(finest.u, base.u);
  }
  const double scale =
      std::max(max_abs(std::span<const double>(spec.phi)), spec.obstacle.uniform_radius());
  add_check(r, "no_contact_tv", !applicable || tv < spec.tol_feas(), tv, spec.tol_feas(),
            applicable);
  add_check(r, "no_contact_unconstrained_gap", !applicable || gap < 1e-6 * scale, gap,
            1e-6 * scale, applicable);
}

void fk_checks(RunResult& r, const ScenarioSpec& spec, const ScenarioConfig& cfg,
               const PenaltySolveResult& sol, std::uint64_t seed) {
  FKOptions opt;
  opt.n_paths = cfg.mc.n_paths;
  opt.dt = cfg.mc.dt;
  opt.c_disc = cfg.mc.c_disc;
  opt.seed = seed;
  const auto sample = mc_sample(spec, cfg.mc);
  bool all = true;
  double worst_excess = 0.0;
  for (const auto& [k, node] : sample) {
    const auto rows = feynman_kac_check(spec, sol.u, sol.mu, k, node, opt);
    for (const FKEstimate& e : rows) {
      all = all && e.pass;
      worst_excess =
          std::max(worst_excess, std::abs(e.estimate - e.grid_value) - e.band);
      r.fk.push_back(e);
    }
  }
  add_check(r, "fk_band", all, worst_excess, 0.0);
}

}  // namespace

RunResult run(const ScenarioConfig& cfg_in, const std::string& subcommand,
              const std::string& out_dir, std::uint64_t seed_override) {
  ScenarioConfig cfg = cfg_in;
  if (seed_override != 0) cfg.seed = seed_override;
  const auto t0 = std::chrono::steady_clock::now();

  RunResult r;
  r.subcommand = subcommand;

  if (subcommand == "verify") {
    RunResult stored = load_result((fs::path(out_dir) / "result.json").string());
    const ScenarioConfig stored_cfg = parse_config_text(stored.config_text);
    const ScenarioSpec spec = stored_cfg.to_spec();
    r = std::move(stored);
    r.subcommand = "verify";
    r.checks.clear();
    r.fk.clear();
    obstacle_validation_checks(r, spec, stored_cfg);
    const AdmissibleCheckSummary sum = run_admissible_checks(spec, r.u, r.mu);
    add_check(r, "minimality_residual", sum.min_residual_max <= spec.tol_min(),
              sum.min_residual_max, spec.tol_min());
    add_check(r, "vi_residual", sum.vi_residual_max <= spec.tol_vi(), sum.vi_residual_max,
              spec.tol_vi());
    if (r.rungs.size() >= 2) {
      const EnergyBoundReport eb = check_energy_bound(spec, r.rungs);
      add_check(r, "energy_trace_bound", eb.energy_ok, eb.energy_max, 2.0 * eb.energy_median);
      add_check(r, "tv_trace_bound", eb.tv_ok, eb.tv_max, 2.0 * eb.tv_median);
    }
    const auto t1 = std::chrono::steady_clock::now();
    r.wall_ms_total = std::chrono::duration<double, std::milli>(t1 - t0).count();
    r.result_hash = hash_result(r);
    return r;
  }

  const ScenarioSpec spec = cfg.to_spec();
  r.scenario = spec.name;
  r.config_text = cfg.serialize();
  r.config_hash = cfg.hash();
  r.seed = cfg.seed;

  obstacle_validation_checks(r, spec, cfg);

  if (subcommand == "solve") {
    const double n_pen = cfg.effective_single_n();
    PenaltySolveResult sol = solve_penalized(spec, n_pen);
    LadderRung row = single_rung_metrics(spec, n_pen, sol);
    add_check(r, "minimality_residual", row.min_residual <= spec.tol_min(), row.min_residual,
              spec.tol_min());
    add_check(r, "vi_residual", row.vi_residual <= spec.tol_vi(), row.vi_residual,
              spec.tol_vi());
    add_check(r, "step_residual", sol.residual_max < spec.tol.tol_res * 10.0, sol.residual_max,
              spec.tol.tol_res * 10.0);
    r.rungs.push_back(row);
    r.u = std::move(sol.u);
    r.mu = std::move(sol.mu);
  } else if (subcommand == "ladder") {
    LadderResult lr = run_ladder(spec, /*throw_on_stall=*/false);
    r.rungs = lr.report.rungs;
    ladder_checks(r, spec, lr);
    no_contact_checks(r, spec, lr.finest);
    r.u = std::move(lr.finest.u);
    r.mu = std::move(lr.finest.mu);
  } else if (subcommand == "mc-check") {
    PenaltySolveResult sol = solve_penalized(spec, cfg.effective_single_n());
    if (!cfg.mc.enabled) {
      add_check(r, "fk_band", true, 0.0, 0.0, /*applicable=*/false);
    } else {
      fk_checks(r, spec, cfg, sol, cfg.seed);
    }
    r.u = std::move(sol.u);
    r.mu = std::move(sol.mu);
  } else {
    throw ValidationError("unknown subcommand '" + subcommand + "'", "subcommand");
  }

  const auto t1 = std::chrono::steady_clock::now();
  r.wall_ms_total = std::chrono::duration<double, std::milli>(t1 - t0).count();
  r.result_hash = hash_result(r);
  return r;
}

namespace {

std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
  out << content;
  if (!out) throw IoError("write failed for '" + p.string() + "'");
}

std::string field_csv(const SpatialGrid& grid, int m, int steps, double horizon,
                      const std::function<double(int, std::size_t, int)>& value,
                      const std::string& what) {
  std::string s;
  s += "# layout: time-major rows, nodes row-major (x fastest); " + what +
       " in state units, t in time units, x/y in length units\n";
  s += "time_step,t,node,ix,iy,x,y";
  for (int c = 0; c < m; ++c) s += ",c" + std::to_string(c);
  s += "\n";
  const double dt = steps > 0 ? horizon / steps : 0.0;
  for (int k = 0; k <= steps; ++k) {
    for (std::size_t node = 0; node < grid.nodes(); ++node) {
      const auto xy = grid.coords(node);
      s += std::to_string(k) + "," + num17(dt * k) + "," + std::to_string(node) + "," +
           std::to_string(grid.node_ix(node)) + "," + std::to_string(grid.node_iy(node)) + "," +
           num17(xy[0]) + "," + num17(xy[1]);
      for (int c = 0; c < m; ++c) s += "," + num17(value(k, node, c));
      s += "\n";
    }
  }
  return s;
}

json rung_to_json(const LadderRung& g) {
  return json{{"penalty", g.penalty},
              {"sup_l2_sq", g.sup_l2_sq},
              {"grad_int", g.grad_int},
              {"dist_l2", g.dist_l2},
              {"diff_l2", g.diff_l2},
              {"diff_grad_sq", g.diff_grad_sq},
              {"tv", g.tv},
              {"min_residual", g.min_residual},
              {"vi_residual", g.vi_residual},
              {"picard_iterations_max", g.picard_iterations_max},
              {"dt_halvings", g.dt_halvings},
              {"wall_ms", g.wall_ms}};
}

LadderRung rung_from_json(const json& j) {
  LadderRung g;
  g.penalty = j.at("penalty");
  g.sup_l2_sq = j.at("sup_l2_sq");
  g.grad_int = j.at("grad_int");
  g.dist_l2 = j.at("dist_l2");
  g.diff_l2 = j.at("diff_l2");
  g.diff_grad_sq = j.at("diff_grad_sq");
  g.tv = j.at("tv");
  g.min_residual = j.at("min_residual");
  g.vi_residual = j.at("vi_residual");
  g.picard_iterations_max = j.at("picard_iterations_max");
  g.dt_halvings = j.at("dt_halvings");
  g.wall_ms = j.at("wall_ms");
  return g;
}

}  // namespace

std::vector<std::string> emit(const RunResult& r, const std::string& format,
                              const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "'");
  std::vector<std::string> written;

  if (format == "csv") {
    const fs::path u_path = fs::path(out_dir) / "u.csv";
    write_file(u_path,
               field_csv(r.u.grid(), r.u.components(), r.u.steps(), r.u.horizon(),
                         [&](int k, std::size_t n, int c) { return r.u.at(k, n, c); },
                         "solution u"));
    written.push_back(u_path.string());
    const fs::path d_path = fs::path(out_dir) / "density.csv";
    write_file(d_path,
               field_csv(r.mu.grid(), r.mu.components(), r.mu.steps(),
                         r.mu.steps() > 0 ? r.mu.dt() * r.mu.steps() : 0.0,
                         [&](int k, std::size_t n, int c) { return r.mu.at(k, n, c); },
                         "reaction density (measure = density * cell volume * dt)"));
    written.push_back(d_path.string());

    std::string rep;
    rep += "# one row per penalty rung; energies in state^2 units, wall_ms in milliseconds\n";
    rep += "penalty,sup_l2_sq,grad_int,dist_l2,diff_l2,diff_grad_sq,tv,min_residual,"
           "vi_residual,picard_iterations_max,dt_halvings,wall_ms\n";
    for (const LadderRung& g : r.rungs) {
      rep += num17(g.penalty) + "," + num17(g.sup_l2_sq) + "," + num17(g.grad_int) + "," +
             num17(g.dist_l2) + "," + num17(g.diff_l2) + "," + num17(g.diff_grad_sq) + "," +
             num17(g.tv) + "," + num17(g.min_residual) + "," + num17(g.vi_residual) + "," +
             std::to_string(g.picard_iterations_max) + "," + std::to_string(g.dt_halvings) +
             "," + num17(g.wall_ms) + "\n";
    }
    const fs::path rep_path = fs::path(out_dir) / "report.csv";
    write_file(rep_path, rep);
    written.push_back(rep_path.string());

    std::string fk;
    fk += "# Feynman-Kac cross-checks; estimate/grid_value in state units\n";
    fk += "component,time_step,node,estimate,std_error,grid_value,band,pass,n_paths\n";
    for (const FKEstimate& e : r.fk) {
      fk += std::to_string(e.component) + "," + std::to_string(e.time_step) + "," +
            std::to_string(e.node) + "," + num17(e.estimate) + "," + num17(e.std_error) + "," +
            num17(e.grid_value) + "," + num17(e.band) + "," + (e.pass ? "true" : "false") +
            "," + std::to_string(e.n_paths) + "\n";
    }
    const fs::path fk_path = fs::path(out_dir) / "fk.csv";
    write_file(fk_path, fk);
    written.push_back(fk_path.string());

    std::string ch;
    ch += "# named acceptance checks\n";
    ch += "name,applicable,pass,value,tolerance\n";
    for (const CheckResult& c : r.checks) {
      ch += c.name + "," + (c.applicable ? "true" : "false") + "," +
            (c.pass ? "true" : "false") + "," + num17(c.value) + "," + num17(c.tolerance) + "\n";
    }
    const fs::path ch_path = fs::path(out_dir) / "checks.csv";
    write_file(ch_path, ch);
    written.push_back(ch_path.string());
    return written;
  }

  if (format != "json") throw ValidationError("unknown emit format '" + format + "'", "format");

  json j;
  j["scenario"] = r.scenario;
  j["subcommand"] = r.subcommand;
  j["config_text"] = r.config_text;
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["version"] = r.version;
  const SpatialGrid& g = r.u.grid();
  j["grid"] = json{{"dimension", g.dim()},
                   {"nodes_x", g.nodes_x()},
                   {"nodes_y", g.nodes_y()},
                   {"extent_x", g.extent(0)},
                   {"extent_y", g.dim() == 2 ? g.extent(1) : 0.0}};
  j["components"] = r.u.components();
  j["steps"] = r.u.steps();
  j["horizon"] = r.u.horizon();
  j["u"] = std::vector<double>(r.u.data().begin(), r.u.data().end());
  j["mu"] = std::vector<double>(r.mu.data().begin(), r.mu.data().end());
  j["rungs"] = json::array();
  for (const LadderRung& gr : r.rungs) j["rungs"].push_back(rung_to_json(gr));
  j["fk"] = json::array();
  for (const FKEstimate& e : r.fk) {
    j["fk"].push_back(json{{"component", e.component},
                           {"time_step", e.time_step},
                           {"node", e.node},
                           {"estimate", e.estimate},
                           {"std_error", e.std_error},
                           {"grid_value", e.grid_value},
                           {"band", e.band},
                           {"pass", e.pass},
                           {"n_paths", e.n_paths}});
  }
  j["checks"] = json::array();
  for (const CheckResult& c : r.checks) {
    j["checks"].push_back(json{{"name", c.name},
                               {"applicable", c.applicable},
                               {"pass", c.pass},
                               {"value", c.value},
                               {"tolerance", c.tolerance}});
  }
  j["wall_ms_total"] = r.wall_ms_total;
  j["result_hash"] = r.result_hash;
  const fs::path p = fs::path(out_dir) / "result.json";
  write_file(p, j.dump(2));
  written.push_back(p.string());
  return written;
}

RunResult load_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open result file '" + path + "'");
  json j;
  in >> j;

  RunResult r;
  r.scenario = j.at("scenario");
  r.subcommand = j.at("subcommand");
  r.config_text = j.at("config_text");
  r.config_hash = j.at("config_hash");
  r.seed = j.at("seed");
  r.version = j.at("version");

  const ScenarioConfig cfg = parse_config_text(r.config_text);
  const ScenarioSpec spec = cfg.to_spec();
  const int m = j.at("components");
  const int steps = j.at("steps");
  const double horizon = j.at("horizon");
  r.u = SolutionField(spec.grid, m, steps, horizon);
  r.mu = ReactionMeasureField(spec.grid, m, steps, horizon);
  const std::vector<double> uu = j.at("u");
  const std::vector<double> mm = j.at("mu");
  if (uu.size() != r.u.data().size() || mm.size() != r.mu.slice_len() * (steps + 1)) {
    throw IoError("stored field shapes disagree with the embedded config");
  }
  std::copy(uu.begin(), uu.end(), r.u.data().begin());
  for (int k = 0; k <= steps; ++k) {
    auto dst = r.mu.slice(k);
    std::copy(mm.begin() + k * r.mu.slice_len(), mm.begin() + (k + 1) * r.mu.slice_len(),
              dst.begin());
  }
  r.u.compute_gradients(spec.coefficient);
  for (const json& gr : j.at("rungs")) r.rungs.push_back(rung_from_json(gr));
  for (const json& e : j.at("fk")) {
    FKEstimate f;
    f.component = e.at("component");
    f.time_step = e.at("time_step");
    f.node = e.at("node");
    f.estimate = e.at("estimate");
    f.std_error = e.at("std_error");
    f.grid_value = e.at("grid_value");
    f.band = e.at("band");
    f.pass = e.at("pass");
    f.n_paths = e.at("n_paths");
    r.fk.push_back(f);
  }
  for (const json& c : j.at("checks")) {
    r.checks.push_back(
        {c.at("name"), c.at("applicable"), c.at("pass"), c.at("value"), c.at("tolerance")});
  }
  r.wall_ms_total = j.at("wall_ms_total");
  r.result_hash = j.at("result_hash");
  return r;
}

}  // namespace pvi
