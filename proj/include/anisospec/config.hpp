#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "anisospec/common.hpp"
#include "anisospec/exponents.hpp"
#include "anisospec/solver.hpp"

namespace anisospec {

/// Flat key-value configuration: one `section.key = value` per line, '#'
/// comments, UTF-8. Chosen over nested formats for diff-friendliness.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text) {
    KeyValueFile kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ParseError("config line " + std::to_string(lineno) +
                             ": expected 'key = value'",
                         lineno);
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw ParseError("config line " + std::to_string(lineno) +
                             ": empty key",
                         lineno);
      kv.values_[key] = value;
    }
    return kv;
  }

  std::string serialize() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
      throw InvalidArgument("config: missing required key '" + key + "'");
    return it->second;
  }

  double get_num(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_num(key, it->second);
  }

  int get_int(const std::string& key, int fallback) const {
    return static_cast<int>(get_num(key, fallback));
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw InvalidArgument("config: key '" + key + "' expects a boolean, got '" +
                          v + "'");
  }

  std::vector<double> get_num_list(const std::string& key) const {
    std::vector<double> out;
    auto it = values_.find(key);
    if (it == values_.end()) return out;
    std::istringstream in(it->second);
    std::string tok;
    while (in >> tok) out.push_back(parse_num(key, tok));
    return out;
  }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  static double parse_num(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
      throw InvalidArgument("config: key '" + key +
                            "' expects a number, got '" + v + "'");
    return x;
  }

  std::map<std::string, std::string> values_;  // sorted: stable round trips
};

/// Monitored-r entry: a literal value or a multiple of r*.
struct RSpec {
  double value = 0.0;
  bool times_r_star = false;  // value is a factor of r* when set

  static RSpec parse(const std::string& tok) {
    RSpec out;
    const auto star = tok.find("*rstar");
    if (star != std::string::npos && star + 6 == tok.size()) {
      out.times_r_star = true;
      out.value = std::strtod(tok.substr(0, star).c_str(), nullptr);
    } else if (tok == "rstar") {
      out.times_r_star = true;
      out.value = 1.0;
    } else {
      char* end = nullptr;
      out.value = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0')
        throw InvalidArgument("monitor.r_list: bad entry '" + tok + "'");
    }
    return out;
  }
};

/// Full run configuration for the batch front-end.
struct RunConfig {
  Problem problem;
  SolverConfig solver;
  std::vector<RSpec> r_list;
  double slack = 0.2;
  SamplingGrid sampling;   // exponent-check sampling resolution
  bool slow_mode = true;   // allow the relaxed gap when all p_i >= 2
  std::optional<double> lipschitz_override;

  // sweep block
  std::string sweep_axis;        // "epsilon" | "modes" | ""
  std::vector<double> sweep_values;

  // mms block
  std::string mms_u_exact;
  std::vector<int> mms_modes;
  int mms_measure_grid = 64;
  double mms_tol_scale_power = 4.0;
  int mms_grid_factor = 3;  // quadrature nodes per axis = factor * modes

  std::string output_dir = "out";
  std::uint64_t seed = 1;
  int threads = 1;

  std::string verify_suites = "all";
  std::map<std::string, double> verify_tols;

  KeyValueFile raw;

  static RunConfig parse(const std::string& text);
  std::string serialize() const { return raw.serialize(); }
};

inline RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  cfg.raw = KeyValueFile::parse(text);
  const KeyValueFile& kv = cfg.raw;

  const int dim = kv.get_int("problem.dim", 2);
  if (dim < 1) throw InvalidArgument("config: problem.dim >= 1");
  auto lengths = kv.get_num_list("problem.lengths");
  if (lengths.empty()) lengths.assign(static_cast<std::size_t>(dim), 1.0);
  if (static_cast<int>(lengths.size()) == 1 && dim > 1)
    lengths.assign(static_cast<std::size_t>(dim), lengths[0]);
  if (static_cast<int>(lengths.size()) != dim)
    throw InvalidArgument("config: problem.lengths must list dim entries");
  cfg.problem.domain = RectDomain(lengths);

  for (int i = 1; i <= dim; ++i) {
    const std::string key = "problem.p" + std::to_string(i);
    cfg.problem.exponents.push_back(FieldExpr::parse(kv.get(key, "2")));
  }
  cfg.problem.forcing = FieldExpr::parse(kv.get("problem.forcing", "0"));
  cfg.problem.initial = FieldExpr::parse(kv.get("problem.initial", "0"));
  cfg.problem.horizon = kv.get_num("problem.horizon", 1.0);
  cfg.problem.epsilon = kv.get_num("problem.eps", 1e-2);

  auto modes = kv.get_num_list("solver.modes");
  if (modes.empty()) modes.assign(1, 8.0);
  if (modes.size() == 1 && dim > 1)
    modes.assign(static_cast<std::size_t>(dim), modes[0]);
  if (static_cast<int>(modes.size()) != dim)
    throw InvalidArgument("config: solver.modes must list dim entries");
  cfg.solver.modes.clear();
  for (double m : modes)
    cfg.solver.modes.push_back(static_cast<int>(std::lround(m)));

  auto grid = kv.get_num_list("solver.grid");
  if (grid.size() == 1 && dim > 1)
    grid.assign(static_cast<std::size_t>(dim), grid[0]);
  cfg.solver.grid.clear();
  for (double g : grid)
    cfg.solver.grid.push_back(static_cast<int>(std::lround(g)));
  if (!cfg.solver.grid.empty() &&
      static_cast<int>(cfg.solver.grid.size()) != dim)
    throw InvalidArgument("config: solver.grid must list dim entries");

  const std::string integ = kv.get("solver.integrator", "imex-exponential");
  if (integ == "imex-exponential")
    cfg.solver.integrator = TimeIntegrator::kImexExponential;
  else if (integ == "explicit-rk")
    cfg.solver.integrator = TimeIntegrator::kExplicitRk;
  else
    throw InvalidArgument("config: solver.integrator must be "
                          "imex-exponential or explicit-rk, got '" +
                          integ + "'");
  cfg.solver.dt = kv.get_num("solver.dt", 0.0);
  cfg.solver.dt_min = kv.get_num("solver.dt_min", 0.0);
  cfg.solver.dt_max = kv.get_num("solver.dt_max", 0.0);
  cfg.solver.tol = kv.get_num("solver.tol", 1e-6);
  const std::string kappa = kv.get("solver.kappa", "auto");
  if (kappa == "auto") {
    cfg.solver.kappa = -1.0;
  } else {
    cfg.solver.kappa = kv.get_num("solver.kappa", 0.0);
    if (cfg.solver.kappa < 0.0)
      throw InvalidArgument("config: solver.kappa must be >= 0 or 'auto'");
  }
  cfg.solver.snapshots = kv.get_int("solver.snapshots", 100);

  {
    std::istringstream in(kv.get("monitor.r_list", "0.5*rstar"));
    std::string tok;
    while (in >> tok) cfg.r_list.push_back(RSpec::parse(tok));
  }
  cfg.slack = kv.get_num("monitor.slack", 0.2);
  cfg.sampling.per_axis = kv.get_int("check.samples", 64);
  cfg.sampling.time_samples = kv.get_int("check.time_samples", 64);
  cfg.slow_mode = kv.get_bool("check.slow_mode", true);
  if (kv.has("problem.lipschitz"))
    cfg.lipschitz_override = kv.get_num("problem.lipschitz", 0.0);

  cfg.sweep_axis = kv.get("sweep.axis", "");
  cfg.sweep_values = kv.get_num_list("sweep.values");

  cfg.mms_u_exact = kv.get("mms.u_exact", "");
  for (double m : kv.get_num_list("mms.modes"))
    cfg.mms_modes.push_back(static_cast<int>(std::lround(m)));
  cfg.mms_measure_grid = kv.get_int("mms.measure_grid", 64);
  cfg.mms_tol_scale_power = kv.get_num("mms.tol_scale_power", 4.0);
  cfg.mms_grid_factor = kv.get_int("mms.grid_factor", 3);

  cfg.output_dir = kv.get("output.dir", "out");
  cfg.seed = static_cast<std::uint64_t>(kv.get_num("seed", 1.0));
  cfg.threads = kv.get_int("threads", 1);

  cfg.verify_suites = kv.get("verify.suites", "all");
  for (const auto& [k, v] : kv.entries()) {
    const std::string prefix = "verify.tol.";
    if (k.rfind(prefix, 0) == 0)
      cfg.verify_tols[k.substr(prefix.size())] = kv.get_num(k, 0.0);
  }
  return cfg;
}

/// Resolve the monitored r values against the problem's admissible r*.
inline std::vector<double> resolve_r_list(const RunConfig& cfg) {
  std::vector<double> out;
  double rstar = -1.0;
  for (const auto& spec : cfg.r_list) {
    if (spec.times_r_star) {
      if (rstar < 0.0) {
        ExponentField field;
        field.components = cfg.problem.exponents;
        const double mu = mu_gap(field, cfg.problem.domain,
                                 cfg.problem.horizon, cfg.sampling);
        rstar = r_star(std::max(mu, 1.0), cfg.problem.domain.dim());
      }
      out.push_back(spec.value * rstar);
    } else {
      out.push_back(spec.value);
    }
  }
  return out;
}

}  // namespace anisospec
