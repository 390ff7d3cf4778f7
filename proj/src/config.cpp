#include "pvi/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "pvi/errors.hpp"
#include "pvi/linsolve.hpp"
#include "pvi/operator.hpp"

namespace pvi {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& raw, const std::string& field) {
  const std::string s = trim(raw);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    throw ValidationError("cannot parse '" + raw + "' as a number", field);
  }
  return v;
}

long long parse_int(const std::string& raw, const std::string& field) {
  const std::string s = trim(raw);
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
    throw ValidationError("cannot parse '" + raw + "' as an integer", field);
  }
  return v;
}

std::vector<double> parse_list(const std::string& raw, const std::string& field) {
  std::vector<double> out;
  const std::string s = trim(raw);
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_double(tok, field));
  return out;
}

std::vector<double> parse_matrix(const std::string& raw, const std::string& field) {
  std::vector<double> out;
  std::size_t cols = 0;
  const std::string s = trim(raw);
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string row;
  while (std::getline(ss, row, ';')) {
    const std::vector<double> vals = parse_list(row, field);
    if (cols == 0) cols = vals.size();
    if (vals.size() != cols) throw ValidationError("ragged matrix rows", field);
    out.insert(out.end(), vals.begin(), vals.end());
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt(v[i]);
  }
  return s;
}

std::string fmt_matrix(const std::vector<double>& v, std::size_t cols) {
  if (cols == 0 || v.empty()) return "";
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += (i % cols == 0) ? ";" : ",";
    s += fmt(v[i]);
  }
  return s;
}

class Reader {
 public:
  explicit Reader(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
      ++lineno;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) {
          throw ParseError("malformed section header '" + line + "'", lineno);
        }
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw ParseError("expected 'key = value', got '" + line + "'", lineno);
      }
      if (section.empty()) throw ParseError("key outside of any section", lineno);
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ParseError("empty key", lineno);
      const std::string full = section + "." + key;
      if (entries_.count(full)) throw ParseError("duplicate key '" + full + "'", lineno);
      entries_[full] = value;
    }
  }

  bool has(const std::string& full) const { return entries_.count(full) > 0; }

  std::string get_raw(const std::string& full) {
    consumed_.insert(full);
    return entries_.at(full);
  }

  void get(const std::string& full, double& dst) {
    if (has(full)) dst = parse_double(get_raw(full), full);
  }
  void get(const std::string& full, int& dst) {
    if (has(full)) dst = static_cast<int>(parse_int(get_raw(full), full));
  }
  void get(const std::string& full, std::uint64_t& dst) {
    if (has(full)) dst = static_cast<std::uint64_t>(parse_int(get_raw(full), full));
  }
  void get(const std::string& full, std::string& dst) {
    if (has(full)) dst = get_raw(full);
  }
  void get(const std::string& full, bool& dst) {
    if (!has(full)) return;
    const std::string v = get_raw(full);
    if (v == "true") {
      dst = true;
    } else if (v == "false") {
      dst = false;
    } else {
      throw ValidationError("expected true/false, got '" + v + "'", full);
    }
  }
  void get(const std::string& full, std::vector<double>& dst) {
    if (has(full)) dst = parse_list(get_raw(full), full);
  }
  void get_matrix(const std::string& full, std::vector<double>& dst) {
    if (has(full)) dst = parse_matrix(get_raw(full), full);
  }

  void finish() const {
    for (const auto& [key, value] : entries_) {
      if (!consumed_.count(key)) throw ValidationError("unknown key '" + key + "'", key);
    }
  }

 private:
  std::map<std::string, std::string> entries_;
  std::set<std::string> consumed_;
};

}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
  Reader r(text);
  ScenarioConfig c;
  r.get("scenario.name", c.name);
  r.get("scenario.dimension", c.dimension);
  r.get("scenario.components", c.components);
  r.get("scenario.seed", c.seed);
  r.get("domain.extent_x", c.extent_x);
  r.get("domain.extent_y", c.extent_y);
  r.get("grid.nodes_x", c.nodes_x);
  r.get("grid.nodes_y", c.nodes_y);
  r.get("time.horizon", c.horizon);
  r.get("time.steps", c.steps);
  r.get("coefficient.kind", c.coefficient_kind);
  r.get("coefficient.lambda", c.lambda);
  r.get("coefficient.value", c.value);
  r.get("coefficient.value_xx", c.value_xx);
  r.get("coefficient.value_xy", c.value_xy);
  r.get("coefficient.value_yy", c.value_yy);
  r.get("coefficient.left", c.piecewise_left);
  r.get("coefficient.right", c.piecewise_right);
  r.get("coefficient.split", c.piecewise_split);
  r.get("coefficient.kappa", c.rot_kappa);
  r.get("coefficient.omega", c.rot_omega);
  r.get("driver.kind", c.driver_kind);
  r.get_matrix("driver.c", c.coupling);
  r.get("driver.kappa", c.driver_kappa);
  r.get("driver.gamma", c.driver_gamma);
  r.get("terminal.kind", c.terminal_kind);
  r.get("terminal.amplitude", c.amplitude);
  r.get("terminal.mode", c.mode);
  r.get("terminal.amplitude2", c.amplitude2);
  r.get("terminal.mode2", c.mode2);
  r.get("terminal.component", c.component);
  r.get("obstacle.kind", c.obstacle_kind);
  r.get("obstacle.radius", c.radius);
  r.get("obstacle.radius0", c.radius0);
  r.get("obstacle.rate", c.rate);
  r.get("obstacle.lower_a", c.lower_a);
  r.get("obstacle.lower_b", c.lower_b);
  r.get("obstacle.lower_c", c.lower_c);
  r.get("obstacle.lower_upper", c.lower_upper);
  r.get("obstacle.lower_base", c.lower_base);
  r.get("obstacle.lower_amp", c.lower_amp);
  r.get("obstacle.upper_base", c.upper_base);
  r.get("obstacle.upper_amp", c.upper_amp);
  r.get_matrix("obstacle.normals", c.hs_normals);
  r.get("obstacle.offsets", c.hs_offsets);
  r.get("obstacle.interior", c.hs_interior);
  r.get("obstacle.uniform_radius", c.uniform_radius);
  r.get("witness.kind", c.witness_kind);
  r.get("witness.epsilon", c.epsilon);
  r.get("witness.amplitude", c.witness_amplitude);
  r.get("witness.component", c.witness_component);
  r.get("witness.scale", c.witness_scale);
  r.get("witness.inner_amp", c.inner_amp);
  r.get("witness.inner_mod", c.inner_mod);
  if (r.has("anchor.values")) {
    c.has_anchor = true;
    r.get("anchor.values", c.anchor);
  }
  r.get("ladder.values", c.ladder);
  r.get("ladder.single_n", c.single_n);
  r.get("solver.theta", c.tol.theta);
  r.get("solver.tol_picard", c.tol.tol_picard);
  r.get("solver.tol_res", c.tol.tol_res);
  r.get("solver.picard_cap", c.tol.picard_cap);
  r.get("solver.retry_halvings", c.tol.retry_halvings);
  r.get("tolerances.tol_feas_factor", c.tol.tol_feas_factor);
  r.get("tolerances.tol_min_factor", c.tol.tol_min_factor);
  r.get("tolerances.tol_vi_factor", c.tol.tol_vi_factor);
  r.get("tolerances.witness_residual_tol", c.tol.witness_residual_tol);
  r.get("linear.cg_tol", c.tol.cg_tol);
  r.get("linear.cg_cap_factor", c.tol.cg_cap_factor);
  r.get("convex.dykstra_tol", c.convex.dykstra_tol);
  r.get("convex.dykstra_cap_factor", c.convex.dykstra_cap_factor);
  r.get("convex.hausdorff_dirs_per_dim", c.convex.hausdorff_dirs_per_dim);
  r.get("mc.enabled", c.mc.enabled);
  r.get("mc.n_paths", c.mc.n_paths);
  r.get("mc.dt", c.mc.dt);
  r.get("mc.c_disc", c.mc.c_disc);
  r.get("mc.nodes", c.mc.nodes);
  r.get("mc.time_fractions", c.mc.time_fractions);
  r.finish();

  // semantic validation happens while building the scenario model
  c.to_spec();
  return c;
}

ScenarioConfig parse_config(const std::string& path) {
  constexpr const char* kBuiltinPrefix = "builtin:";
  if (path.rfind(kBuiltinPrefix, 0) == 0) {
    return parse_config_text(builtin_config_text(path.substr(std::strlen(kBuiltinPrefix))));
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string ScenarioConfig::serialize() const {
  std::string s;
  auto kv = [&s](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
  s += "[scenario]\n";
  kv("name", name);
  kv("dimension", std::to_string(dimension));
  kv("components", std::to_string(components));
  kv("seed", std::to_string(seed));
  s += "\n[domain]\n";
  kv("extent_x", fmt(extent_x));
  kv("extent_y", fmt(extent_y));
  s += "\n[grid]\n";
  kv("nodes_x", std::to_string(nodes_x));
  kv("nodes_y", std::to_string(nodes_y));
  s += "\n[time]\n";
  kv("horizon", fmt(horizon));
  kv("steps", std::to_string(steps));
  s += "\n[coefficient]\n";
  kv("kind", coefficient_kind);
  kv("lambda", fmt(lambda));
  kv("value", fmt(value));
  kv("value_xx", fmt(value_xx));
  kv("value_xy", fmt(value_xy));
  kv("value_yy", fmt(value_yy));
  kv("left", fmt(piecewise_left));
  kv("right", fmt(piecewise_right));
  kv("split", fmt(piecewise_split));
  kv("kappa", fmt(rot_kappa));
  kv("omega", fmt(rot_omega));
  s += "\n[driver]\n";
  kv("kind", driver_kind);
  kv("c", fmt_matrix(coupling, components));
  kv("kappa", fmt(driver_kappa));
  kv("gamma", fmt(driver_gamma));
  s += "\n[terminal]\n";
  kv("kind", terminal_kind);
  kv("amplitude", fmt(amplitude));
  kv("mode", std::to_string(mode));
  kv("amplitude2", fmt(amplitude2));
  kv("mode2", std::to_string(mode2));
  kv("component", std::to_string(component));
  s += "\n[obstacle]\n";
  kv("kind", obstacle_kind);
  kv("radius", fmt(radius));
  kv("radius0", fmt(radius0));
  kv("rate", fmt(rate));
  kv("lower_a", fmt(lower_a));
  kv("lower_b", fmt(lower_b));
  kv("lower_c", fmt(lower_c));
  kv("lower_upper", fmt(lower_upper));
  kv("lower_base", fmt(lower_base));
  kv("lower_amp", fmt(lower_amp));
  kv("upper_base", fmt(upper_base));
  kv("upper_amp", fmt(upper_amp));
  kv("normals", fmt_matrix(hs_normals, components));
  kv("offsets", fmt_list(hs_offsets));
  kv("interior", fmt_list(hs_interior));
  kv("uniform_radius", fmt(uniform_radius));
  s += "\n[witness]\n";
  kv("kind", witness_kind);
  kv("epsilon", fmt(epsilon));
  kv("amplitude", fmt(witness_amplitude));
  kv("component", std::to_string(witness_component));
  kv("scale", fmt(witness_scale));
  kv("inner_amp", fmt(inner_amp));
  kv("inner_mod", fmt(inner_mod));
  if (has_anchor) {
    s += "\n[anchor]\n";
    kv("values", fmt_list(anchor));
  }
  s += "\n[ladder]\n";
  kv("values", fmt_list(ladder));
  kv("single_n", fmt(single_n));
  s += "\n[solver]\n";
  kv("theta", fmt(tol.theta));
  kv("tol_picard", fmt(tol.tol_picard));
  kv("tol_res", fmt(tol.tol_res));
  kv("picard_cap", std::to_string(tol.picard_cap));
  kv("retry_halvings", std::to_string(tol.retry_halvings));
  s += "\n[tolerances]\n";
  kv("tol_feas_factor", fmt(tol.tol_feas_factor));
  kv("tol_min_factor", fmt(tol.tol_min_factor));
  kv("tol_vi_factor", fmt(tol.tol_vi_factor));
  kv("witness_residual_tol", fmt(tol.witness_residual_tol));
  s += "\n[linear]\n";
  kv("cg_tol", fmt(tol.cg_tol));
  kv("cg_cap_factor", std::to_string(tol.cg_cap_factor));
  s += "\n[convex]\n";
  kv("dykstra_tol", fmt(convex.dykstra_tol));
  kv("dykstra_cap_factor", std::to_string(convex.dykstra_cap_factor));
  kv("hausdorff_dirs_per_dim", std::to_string(convex.hausdorff_dirs_per_dim));
  s += "\n[mc]\n";
  kv("enabled", mc.enabled ? "true" : "false");
  kv("n_paths", std::to_string(mc.n_paths));
  kv("dt", fmt(mc.dt));
  kv("c_disc", fmt(mc.c_disc));
  kv("nodes", std::to_string(mc.nodes));
  kv("time_fractions", fmt_list(mc.time_fractions));
  return s;
}

std::uint64_t ScenarioConfig::hash() const {
  const std::string s = serialize();
  return fnv1a(fnv1a_init(), s.data(), s.size());
}

namespace {

double bump(const ScenarioConfig& c, std::span<const double> x) {
  double b = std::sin(kPi * x[0] / c.extent_x);
  if (c.dimension == 2) b *= std::sin(kPi * x[1] / c.extent_y);
  return b;
}

double cos_bump(const ScenarioConfig& c, std::span<const double> x) {
  double b = std::cos(kPi * x[0] / c.extent_x);
  if (c.dimension == 2) b *= std::cos(kPi * x[1] / c.extent_y);
  return b;
}

CoefficientField make_coefficient(const ScenarioConfig& c) {
  const int d = c.dimension;
  if (c.coefficient_kind == "constant") {
    SymMat a;
    if (d == 1) {
      a.a11 = c.value;
      a.a22 = 0.0;
    } else {
      a.a11 = c.value_xx;
      a.a22 = c.value_yy;
      a.a12 = c.value_xy;
    }
    return CoefficientField::constant(a, c.lambda, d);
  }
  if (c.coefficient_kind == "piecewise") {
    const double left = c.piecewise_left, right = c.piecewise_right, split = c.piecewise_split;
    return CoefficientField(
        [left, right, split](double, std::span<const double> x) {
          SymMat a;
          const double v = x[0] < split ? left : right;
          a.a11 = v;
          a.a22 = v;
          return a;
        },
        c.lambda, d);
  }
  if (c.coefficient_kind == "rotating_anisotropy") {
    if (d != 2) {
      throw ValidationError("rotating_anisotropy requires dimension 2", "coefficient.kind");
    }
    const double kappa = c.rot_kappa, omega = c.rot_omega;
    return CoefficientField(
        [kappa, omega](double t, std::span<const double>) {
          const double cs = std::cos(omega * t), sn = std::sin(omega * t);
          SymMat a;
          a.a11 = cs * cs + kappa * sn * sn;
          a.a22 = sn * sn + kappa * cs * cs;
          a.a12 = (1.0 - kappa) * sn * cs;
          return a;
        },
        c.lambda, d);
  }
  throw ValidationError("unknown coefficient kind '" + c.coefficient_kind + "'",
                        "coefficient.kind");
}

Driver make_driver(const ScenarioConfig& c) {
  if (c.driver_kind == "zero") return Driver::zero(c.components);
  if (c.driver_kind == "linear_coupling") {
    return Driver::linear_coupling(c.components, c.coupling);
  }
  if (c.driver_kind == "clipped_nonlinear") {
    return Driver::clipped_nonlinear(c.components, c.dimension, c.driver_kappa, c.driver_gamma);
  }
  throw ValidationError("unknown driver kind '" + c.driver_kind + "'", "driver.kind");
}

std::vector<double> make_terminal(const ScenarioConfig& c, const SpatialGrid& grid) {
  const int m = c.components;
  std::vector<double> phi(grid.nodes() * m, 0.0);
  if (c.terminal_kind == "zero") return phi;
  if (c.terminal_kind != "sine" && c.terminal_kind != "sine_sum") {
    throw ValidationError("unknown terminal kind '" + c.terminal_kind + "'", "terminal.kind");
  }
  if (c.component < 0 || c.component >= m) {
    throw ValidationError("terminal component out of range", "terminal.component");
  }
  for (std::size_t node = 0; node < grid.nodes(); ++node) {
    const auto xy = grid.coords(node);
    double v = c.amplitude * std::sin(c.mode * kPi * xy[0] / c.extent_x);
    if (c.dimension == 2) v *= std::sin(c.mode * kPi * xy[1] / c.extent_y);
    if (c.terminal_kind == "sine_sum") {
      double v2 = c.amplitude2 * std::sin(c.mode2 * kPi * xy[0] / c.extent_x);
      if (c.dimension == 2) v2 *= std::sin(c.mode2 * kPi * xy[1] / c.extent_y);
      v += v2;
    }
    phi[node * m + c.component] = v;
  }
  return phi;
}

ObstacleFamily make_obstacle(const ScenarioConfig& c) {
  const int m = c.components;
  const double sqm = std::sqrt(static_cast<double>(m));
  if (c.obstacle_kind == "static_ball") {
    const double r = c.radius;
    const double rd = c.uniform_radius > 0 ? c.uniform_radius : r;
    return ObstacleFamily(
        [r, m](double, std::span<const double>) {
          return ConvexSet::ball(std::vector<double>(m, 0.0), r);
        },
        rd, true);
  }
  if (c.obstacle_kind == "growing_ball") {
    const double r0 = c.radius0, rate = c.rate;
    const double rd = c.uniform_radius > 0 ? c.uniform_radius : r0 + rate * c.horizon;
    return ObstacleFamily(
        [r0, rate, m](double t, std::span<const double>) {
          return ConvexSet::ball(std::vector<double>(m, 0.0), r0 + rate * t);
        },
        rd, true);
  }
  if (c.obstacle_kind == "lower_box") {
    const ScenarioConfig cc = c;
    const double bound = std::max(
        std::abs(c.lower_a) + std::abs(c.lower_b) * c.horizon + std::abs(c.lower_c),
        std::abs(c.lower_upper));
    const double rd = c.uniform_radius > 0 ? c.uniform_radius : sqm * bound;
    return ObstacleFamily(
        [cc, m](double t, std::span<const double> x) {
          const double lower = (cc.lower_a + cc.lower_b * t) * bump(cc, x) + cc.lower_c;
          return ConvexSet::box(std::vector<double>(m, lower),
                                std::vector<double>(m, cc.lower_upper));
        },
        rd, false);
  }
  if (c.obstacle_kind == "moving_box") {
    const ScenarioConfig cc = c;
    const double bound = std::max(std::abs(c.lower_base) + std::abs(c.lower_amp),
                                  std::abs(c.upper_base) + std::abs(c.upper_amp));
    const double rd = c.uniform_radius > 0 ? c.uniform_radius : sqm * bound;
    return ObstacleFamily(
        [cc, m](double t, std::span<const double> x) {
          const double mod = std::cos(cc.rate * t);
          const double lower = cc.lower_base - cc.lower_amp * bump(cc, x) * mod;
          const double upper = cc.upper_base + cc.upper_amp * cos_bump(cc, x) * mod;
          return ConvexSet::box(std::vector<double>(m, lower), std::vector<double>(m, upper));
        },
        rd, false);
  }
  if (c.obstacle_kind == "halfspace_intersection") {
    ConvexSet base = ConvexSet::halfspaces(c.hs_normals, c.hs_offsets, c.hs_interior);
    const double rd = c.uniform_radius > 0 ? c.uniform_radius : base.norm_bound() * (1 + 1e-9);
    return ObstacleFamily([base](double, std::span<const double>) { return base; }, rd, true);
  }
  throw ValidationError("unknown obstacle kind '" + c.obstacle_kind + "'", "obstacle.kind");
}

WitnessSpec make_witness(const ScenarioConfig& c, const SpatialGrid& grid,
                         const CoefficientField& coeff) {
  WitnessSpec w;
  w.epsilon = c.epsilon;
  const int m = c.components;
  if (c.witness_kind == "zero") {
    w.u_star = [m](double, std::span<const double>, std::span<double> out) {
      for (int j = 0; j < m; ++j) out[j] = 0.0;
    };
    w.f_star = w.u_star;
    return w;
  }
  if (c.witness_kind == "sine") {
    const ScenarioConfig cc = c;
    const int comp = c.witness_component;
    if (comp < 0 || comp >= m) {
      throw ValidationError("witness component out of range", "witness.component");
    }
    if (cc.coefficient_kind != "constant") {
      throw ValidationError("sine witness requires a constant coefficient", "witness.kind");
    }
    w.u_star = [cc, m, comp](double, std::span<const double> x, std::span<double> out) {
      for (int j = 0; j < m; ++j) out[j] = 0.0;
      out[comp] = cc.witness_amplitude * bump(cc, x);
    };
    // f* = -L u*; the cross term of a constant tensor turns the sine bump
    // into a cosine product
    w.f_star = [cc, m, comp](double, std::span<const double> x, std::span<double> out) {
      for (int j = 0; j < m; ++j) out[j] = 0.0;
      const double kx = kPi / cc.extent_x;
      double v;
      if (cc.dimension == 1) {
        v = 0.5 * cc.value * kx * kx * cc.witness_amplitude * bump(cc, x);
      } else {
        const double ky = kPi / cc.extent_y;
        v = 0.5 * (cc.value_xx * kx * kx + cc.value_yy * ky * ky) * cc.witness_amplitude *
                bump(cc, x) -
            cc.value_xy * kx * ky * cc.witness_amplitude * cos_bump(cc, x);
      }
      out[comp] = v;
    };
    return w;
  }
  if (c.witness_kind == "box_midpoint") {
    const ScenarioConfig cc = c;
    if (cc.coefficient_kind != "constant" || cc.dimension != 1) {
      throw ValidationError("box_midpoint witness requires a constant 1d coefficient",
                            "witness.kind");
    }
    // u* is the midpoint of the inner envelopes: g(t) sin(pi x / L)
    auto g = [cc](double t) {
      return 0.5 * cc.inner_amp * cc.inner_mod *
             (std::sin(cc.rate * t) - std::cos(cc.rate * t));
    };
    auto gp = [cc](double t) {
      return 0.5 * cc.inner_amp * cc.inner_mod * cc.rate *
             (std::cos(cc.rate * t) + std::sin(cc.rate * t));
    };
    w.u_star = [cc, g, m](double t, std::span<const double> x, std::span<double> out) {
      const double v = g(t) * bump(cc, x);
      for (int j = 0; j < m; ++j) out[j] = v;
    };
    w.f_star = [cc, g, gp, m](double t, std::span<const double> x, std::span<double> out) {
      const double kx = kPi / cc.extent_x;
      const double v = (-gp(t) + 0.5 * cc.value * kx * kx * g(t)) * bump(cc, x);
      for (int j = 0; j < m; ++j) out[j] = v;
    };
    return w;
  }
  if (c.witness_kind == "stationary_profile") {
    // u* = scale * w with L w = -1 and zero boundary data, solved on this
    // grid, so the witness equation holds exactly with f* = scale
    const DiscreteOperator op = DiscreteOperator::assemble(coeff, grid, 0.0);
    const std::size_t ni = grid.interior_nodes();
    std::vector<double> ones(ni, 1.0), sol(ni, 0.0);
    solve_stationary(op, ones, sol);
    auto profile = std::make_shared<std::vector<double>>(grid.nodes(), 0.0);
    for (std::size_t i = 0; i < ni; ++i) {
      (*profile)[grid.node_of_interior(i)] = c.witness_scale * sol[i];
    }
    // capture the grid geometry by value; the closure outlives this frame
    const int dim = grid.dim();
    const double hx = grid.spacing(0);
    const double hy = dim == 2 ? grid.spacing(1) : 1.0;
    const std::size_t nx = grid.nodes_x();
    const std::size_t ny = grid.nodes_y();
    const int mm = m;
    w.u_star = [profile, dim, hx, hy, nx, ny, mm](double, std::span<const double> x,
                                                  std::span<double> out) {
      double fx = x[0] / hx;
      std::size_t ix =
          static_cast<std::size_t>(std::min(std::max(fx, 0.0), static_cast<double>(nx - 2)));
      const double wx = std::min(std::max(fx - static_cast<double>(ix), 0.0), 1.0);
      double v;
      if (dim == 1) {
        v = (1.0 - wx) * (*profile)[ix] + wx * (*profile)[ix + 1];
      } else {
        double fy = x[1] / hy;
        std::size_t iy =
            static_cast<std::size_t>(std::min(std::max(fy, 0.0), static_cast<double>(ny - 2)));
        const double wy = std::min(std::max(fy - static_cast<double>(iy), 0.0), 1.0);
        const std::size_t b = iy * nx + ix;
        v = (1 - wx) * (1 - wy) * (*profile)[b] + wx * (1 - wy) * (*profile)[b + 1] +
            (1 - wx) * wy * (*profile)[b + nx] + wx * wy * (*profile)[b + nx + 1];
      }
      for (int j = 0; j < mm; ++j) out[j] = v;
    };
    const double scale = c.witness_scale;
    w.f_star = [scale, mm](double, std::span<const double>, std::span<double> out) {
      for (int j = 0; j < mm; ++j) out[j] = scale;
    };
    return w;
  }
  throw ValidationError("unknown witness kind '" + c.witness_kind + "'", "witness.kind");
}

}  // namespace

ScenarioSpec ScenarioConfig::to_spec() const {
  convex_options() = convex;
  if (dimension != 1 && dimension != 2) {
    throw ValidationError("dimension must be 1 or 2", "scenario.dimension");
  }
  ScenarioSpec s{};
  s.name = name;
  s.grid = dimension == 1
               ? SpatialGrid::line(extent_x, static_cast<std::size_t>(nodes_x))
               : SpatialGrid::rectangle(extent_x, extent_y, static_cast<std::size_t>(nodes_x),
                                        static_cast<std::size_t>(nodes_y));
  s.horizon = horizon;
  s.n_steps = steps;
  s.components = components;
  s.driver = make_driver(*this);
  s.coefficient = make_coefficient(*this);
  s.obstacle = make_obstacle(*this);
  s.phi = make_terminal(*this, s.grid);
  if (witness_kind != "none") {
    s.witness = make_witness(*this, s.grid, s.coefficient);
  }
  if (has_anchor) s.anchor = anchor;
  s.ladder = ladder;
  s.tol = tol;
  s.seed = seed;
  s.validate();
  return s;
}

namespace {

ScenarioConfig make_builtin(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  if (name == "trivial_ball") {
    c.dimension = 1;
    c.components = 2;
    c.seed = 101;
    c.extent_x = 1.0;
    c.nodes_x = 17;
    c.horizon = 0.5;
    c.steps = 32;
    c.obstacle_kind = "static_ball";
    c.radius = 1.0;
    c.witness_kind = "zero";
    c.epsilon = 0.5;
    c.has_anchor = true;
    c.anchor = {0.0, 0.0};
    c.ladder = {16, 64, 256, 1024};
    c.mc.enabled = true;
    c.mc.dt = 2e-3;
    c.mc.c_disc = 0.5;
    return c;
  }
  if (name == "heat_manufactured") {
    c.dimension = 1;
    c.components = 1;
    c.seed = 202;
    c.extent_x = 3.141592653589793;
    c.nodes_x = 65;
    c.horizon = 1.0;
    c.steps = 128;
    c.terminal_kind = "sine";
    c.amplitude = 1.0;
    c.mode = 1;
    c.obstacle_kind = "static_ball";
    c.radius = 10.0;
    c.witness_kind = "zero";
    c.epsilon = 1.0;
    c.has_anchor = true;
    c.anchor = {0.0};
    c.ladder = {16, 64, 256};
    c.mc.enabled = true;
    c.mc.dt = 1e-3;
    c.mc.c_disc = 0.5;
    return c;
  }
  if (name == "psor_compare") {
    c.dimension = 1;
    c.components = 1;
    c.seed = 303;
    c.extent_x = 1.0;
    c.nodes_x = 33;
    c.horizon = 1.0;
    c.steps = 64;
    c.coefficient_kind = "piecewise";
    c.piecewise_left = 1.0;
    c.piecewise_right = 0.25;
    c.piecewise_split = 0.5;
    c.lambda = 4.0;
    c.terminal_kind = "sine";
    c.amplitude = 0.3;
    c.mode = 1;
    c.obstacle_kind = "lower_box";
    c.lower_a = 0.35;
    c.lower_b = -0.1;
    c.lower_c = -0.05;
    c.lower_upper = 10.0;
    c.witness_kind = "stationary_profile";
    c.witness_scale = 1.0;
    c.epsilon = 0.04;
    c.has_anchor = true;
    c.anchor = {5.0};
    c.ladder = {16, 64, 256, 1024, 4096};
    c.mc.enabled = false;
    return c;
  }
  if (name == "growing_ball") {
    c.dimension = 2;
    c.components = 2;
    c.seed = 404;
    c.extent_x = 1.0;
    c.extent_y = 1.0;
    c.nodes_x = 9;
    c.nodes_y = 9;
    c.horizon = 0.5;
    c.steps = 24;
    c.coefficient_kind = "rotating_anisotropy";
    c.rot_kappa = 0.5;
    c.rot_omega = 3.141592653589793;
    c.lambda = 2.0;
    c.terminal_kind = "sine";
    c.amplitude = 0.8;
    c.mode = 1;
    c.component = 0;
    c.obstacle_kind = "growing_ball";
    c.radius0 = 1.0;
    c.rate = 1.0;
    c.witness_kind = "zero";
    c.epsilon = 0.5;
    c.has_anchor = true;
    c.anchor = {0.0, 0.0};
    c.ladder = {16, 64, 256, 1024};
    c.mc.enabled = true;
    c.mc.dt = 1e-3;
    c.mc.c_disc = 2.0;
    return c;
  }
  if (name == "moving_box_example2") {
    c.dimension = 1;
    c.components = 1;
    c.seed = 505;
    c.extent_x = 1.0;
    c.nodes_x = 33;
    c.horizon = 1.0;
    c.steps = 64;
    c.driver_kind = "clipped_nonlinear";
    c.driver_kappa = 0.5;
    c.driver_gamma = 0.1;
    c.terminal_kind = "sine_sum";
    c.amplitude = 0.3;
    c.mode = 1;
    c.amplitude2 = 0.05;
    c.mode2 = 3;
    c.obstacle_kind = "moving_box";
    c.lower_base = -0.6;
    c.lower_amp = 0.2;
    c.upper_base = 0.6;
    c.upper_amp = 0.2;
    c.rate = 3.141592653589793;
    c.witness_kind = "box_midpoint";
    c.inner_amp = 0.3;
    c.inner_mod = 0.3;
    c.epsilon = 0.2;
    c.has_anchor = true;
    c.anchor = {0.0};
    c.ladder = {16, 64, 256, 1024};
    c.mc.enabled = false;
    return c;
  }
  if (name == "coupled_two_component") {
    c.dimension = 1;
    c.components = 2;
    c.seed = 606;
    c.extent_x = 1.0;
    c.nodes_x = 33;
    c.horizon = 0.5;
    c.steps = 64;
    c.driver_kind = "linear_coupling";
    c.coupling = {0.0, 7.0, 7.0, 0.0};
    c.terminal_kind = "sine";
    c.amplitude = 0.4;
    c.mode = 1;
    c.component = 0;
    c.obstacle_kind = "static_ball";
    c.radius = 0.5;
    c.witness_kind = "zero";
    c.epsilon = 0.25;
    c.has_anchor = true;
    c.anchor = {0.0, 0.0};
    c.ladder = {16, 64, 256, 1024, 4096};
    c.mc.enabled = true;
    c.mc.dt = 1e-3;
    c.mc.c_disc = 2.0;
    return c;
  }
  throw ValidationError("unknown builtin scenario '" + name + "'", "builtin");
}

}  // namespace

const std::vector<std::string>& builtin_scenario_names() {
  static const std::vector<std::string> names = {
      "trivial_ball",   "heat_manufactured",   "psor_compare",
      "growing_ball",   "moving_box_example2", "coupled_two_component",
  };
  return names;
}

std::string builtin_config_text(const std::string& name) {
  return make_builtin(name).serialize();
}

}  // namespace pvi
