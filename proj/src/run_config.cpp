#include "sdrd/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sdrd/format.hpp"

namespace sdrd {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  throw std::invalid_argument("config line " + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& v, int line, const std::string& key) {
  std::size_t idx = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &idx);
  } catch (const std::exception&) {
    parse_fail(line, "key '" + key + "' needs a number, got '" + v + "'");
  }
  if (idx != v.size())
    parse_fail(line, "key '" + key + "' needs a number, got '" + v + "'");
  return out;
}

int to_int(const std::string& v, int line, const std::string& key) {
  std::size_t idx = 0;
  long out = 0;
  try {
    out = std::stol(v, &idx);
  } catch (const std::exception&) {
    parse_fail(line, "key '" + key + "' needs an integer, got '" + v + "'");
  }
  if (idx != v.size() || out < INT_MIN || out > INT_MAX)
    parse_fail(line, "key '" + key + "' needs an integer, got '" + v + "'");
  return static_cast<int>(out);
}

bool to_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  parse_fail(line, "key '" + key + "' needs true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(v);
  while (std::getline(is, cur, ',')) out.push_back(trim(cur));
  return out;
}

std::vector<double> to_double_list(const std::string& v, int line,
                                   const std::string& key) {
  std::vector<double> out;
  for (const std::string& item : split_list(v)) out.push_back(to_double(item, line, key));
  return out;
}

struct RawEntry {
  std::string value;
  int line = 0;
};

using RawSection = std::map<std::string, RawEntry>;
using RawConfig = std::map<std::string, RawSection>;

RawConfig parse_raw(const std::string& text) {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"domain", {"kind", "extent", "collar_depth"}},
      {"weight", {"s", "species_s"}},
      {"mesh", {"n_collar", "n_interior", "tau_max", "boundary_resolution"}},
      {"model", {}},  // name, x bounds and builtin parameters, checked later
      {"initial", {"values"}},
      {"solver",
       {"dt_init", "dt_min", "dt_max", "t_final", "p", "delta_x", "norm_max", "newton",
        "newton_max_iters", "newton_tol"}},
      {"output", {"directory", "snapshot_stride", "formats"}},
  };

  RawConfig raw;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') parse_fail(n, "unterminated section header '" + t + "'");
      section = trim(t.substr(1, t.size() - 2));
      if (!schema.count(section)) parse_fail(n, "unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) parse_fail(n, "expected 'key = value', got '" + t + "'");
    if (section.empty()) parse_fail(n, "key before any [section]");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) parse_fail(n, "empty key");
    if (value.empty()) parse_fail(n, "key '" + key + "' has an empty value");
    const std::set<std::string>& allowed = schema.at(section);
    if (section != "model" && !allowed.count(key))
      parse_fail(n, "unknown key '" + key + "' in [" + section + "]");
    if (raw[section].count(key))
      parse_fail(n, "duplicate key '" + key + "' in [" + section + "]");
    raw[section][key] = {value, n};
  }
  return raw;
}

// Full parameter set per builtin; parsing completes partial user input with
// these defaults so the canonical form is explicit.
const std::map<std::string, std::map<std::string, double>>& builtin_params() {
  static const std::map<std::string, std::map<std::string, double>> table = {
      {"logistic", {{"alpha", 1.0}, {"lambda", 1.0}, {"a", 1.0}}},
      {"porous_media", {{"alpha", 1.0}, {"growth", 0.0}}},
      {"two_population",
       {{"a", 0.0},
        {"b", 0.0},
        {"a0", 0.0},
        {"a1", 0.0},
        {"a2", 0.0},
        {"b0", 0.0},
        {"b1", 0.0},
        {"b2", 0.0},
        {"alpha", 1.0},
        {"beta", 1.0},
        {"gamma", 1.0},
        {"delta", 1.0}}},
  };
  return table;
}

double param(const RunConfig& cfg, const std::string& name) {
  const auto it = cfg.model_params.find(name);
  if (it == cfg.model_params.end())
    throw std::logic_error("missing model parameter " + name);
  return it->second;
}

std::string list_to_text(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += g17(v[i]);
  }
  return out;
}

}  // namespace

int config_species_count(const std::string& model_name) {
  if (model_name == "logistic" || model_name == "porous_media") return 1;
  if (model_name == "two_population") return 2;
  throw std::invalid_argument("unknown model name: " + model_name);
}

RunConfig parse_config(const std::string& text) {
  const RawConfig raw = parse_raw(text);
  RunConfig cfg;

  auto section = [&raw](const char* name) -> const RawSection* {
    const auto it = raw.find(name);
    return it == raw.end() ? nullptr : &it->second;
  };
  auto entry = [](const RawSection* s, const char* key) -> const RawEntry* {
    if (s == nullptr) return nullptr;
    const auto it = s->find(key);
    return it == s->end() ? nullptr : &it->second;
  };

  if (const RawSection* s = section("domain")) {
    if (const RawEntry* e = entry(s, "kind")) {
      if (e->value == "interval")
        cfg.domain.kind = DomainKind::Interval;
      else if (e->value == "disk")
        cfg.domain.kind = DomainKind::Disk;
      else
        parse_fail(e->line, "domain.kind must be interval or disk, got '" + e->value + "'");
    }
    if (const RawEntry* e = entry(s, "extent"))
      cfg.domain.extent = to_double(e->value, e->line, "extent");
    if (const RawEntry* e = entry(s, "collar_depth"))
      cfg.domain.collar_depth = to_double(e->value, e->line, "collar_depth");
  }

  if (const RawSection* s = section("weight")) {
    if (const RawEntry* e = entry(s, "s")) cfg.s = to_double(e->value, e->line, "s");
    if (const RawEntry* e = entry(s, "species_s"))
      cfg.species_s = to_double_list(e->value, e->line, "species_s");
  }

  if (const RawSection* s = section("mesh")) {
    if (const RawEntry* e = entry(s, "n_collar"))
      cfg.n_collar = to_int(e->value, e->line, "n_collar");
    if (const RawEntry* e = entry(s, "n_interior"))
      cfg.n_interior = to_int(e->value, e->line, "n_interior");
    if (const RawEntry* e = entry(s, "tau_max"))
      cfg.tau_max = to_double(e->value, e->line, "tau_max");
    if (const RawEntry* e = entry(s, "boundary_resolution"))
      cfg.boundary_resolution = to_int(e->value, e->line, "boundary_resolution");
  }

  std::vector<std::string> violations;

  if (const RawSection* s = section("model")) {
    if (const RawEntry* e = entry(s, "name")) cfg.model = e->value;
    if (const RawEntry* e = entry(s, "x_lower"))
      cfg.x_lower = to_double_list(e->value, e->line, "x_lower");
    if (const RawEntry* e = entry(s, "x_upper"))
      cfg.x_upper = to_double_list(e->value, e->line, "x_upper");
    const auto params = builtin_params().find(cfg.model);
    if (params != builtin_params().end()) cfg.model_params = params->second;
    for (const auto& [key, e] : *s) {
      if (key == "name" || key == "x_lower" || key == "x_upper") continue;
      if (params == builtin_params().end() || !params->second.count(key)) {
        violations.push_back("model." + key + " is not a parameter of builtin '" +
                             cfg.model + "'");
        continue;
      }
      cfg.model_params[key] = to_double(e.value, e.line, key);
    }
  } else {
    cfg.model_params = builtin_params().at(cfg.model);
  }

  if (const RawSection* s = section("initial")) {
    if (const RawEntry* e = entry(s, "values"))
      cfg.initial_values = to_double_list(e->value, e->line, "values");
  }
  if (cfg.initial_values.empty() && builtin_params().count(cfg.model))
    cfg.initial_values.assign(config_species_count(cfg.model), 0.5);

  if (const RawSection* s = section("solver")) {
    if (const RawEntry* e = entry(s, "dt_init"))
      cfg.solver.dt_init = to_double(e->value, e->line, "dt_init");
    if (const RawEntry* e = entry(s, "dt_min"))
      cfg.solver.dt_min = to_double(e->value, e->line, "dt_min");
    if (const RawEntry* e = entry(s, "dt_max"))
      cfg.solver.dt_max = to_double(e->value, e->line, "dt_max");
    if (const RawEntry* e = entry(s, "t_final"))
      cfg.solver.t_final = to_double(e->value, e->line, "t_final");
    if (const RawEntry* e = entry(s, "p")) cfg.solver.p = to_double(e->value, e->line, "p");
    if (const RawEntry* e = entry(s, "delta_x"))
      cfg.solver.delta_x = to_double(e->value, e->line, "delta_x");
    if (const RawEntry* e = entry(s, "norm_max"))
      cfg.solver.norm_max = to_double(e->value, e->line, "norm_max");
    if (const RawEntry* e = entry(s, "newton"))
      cfg.solver.newton.enabled = to_bool(e->value, e->line, "newton");
    if (const RawEntry* e = entry(s, "newton_max_iters"))
      cfg.solver.newton.max_iters = to_int(e->value, e->line, "newton_max_iters");
    if (const RawEntry* e = entry(s, "newton_tol"))
      cfg.solver.newton.tol = to_double(e->value, e->line, "newton_tol");
  }
  // default norm exponent clears p > m + 2 for both supported dimensions
  if (cfg.solver.p == 0.0) cfg.solver.p = 5.0;

  if (const RawSection* s = section("output")) {
    if (const RawEntry* e = entry(s, "directory")) cfg.output.directory = e->value;
    if (const RawEntry* e = entry(s, "snapshot_stride"))
      cfg.output.snapshot_stride = to_int(e->value, e->line, "snapshot_stride");
    if (const RawEntry* e = entry(s, "formats")) cfg.output.formats = split_list(e->value);
  }

  std::vector<std::string> semantic = config_violations(cfg);
  violations.insert(violations.end(), semantic.begin(), semantic.end());
  if (!violations.empty()) {
    std::string msg = "configuration invalid:";
    for (const std::string& v : violations) msg += "\n  - " + v;
    throw std::invalid_argument(msg);
  }
  return cfg;
}

std::vector<std::string> config_violations(const RunConfig& cfg) {
  std::vector<std::string> v;
  auto bad = [&v](const std::string& msg) { v.push_back(msg); };

  if (!(cfg.domain.extent > 0.0))
    bad("domain.extent must be positive: got " + g17(cfg.domain.extent));
  if (!(cfg.domain.collar_depth > 0.0 && cfg.domain.collar_depth <= 1.0 &&
        cfg.domain.collar_depth < cfg.domain.extent / 2.0))
    bad("domain.collar_depth must lie in (0, 1] and below extent/2: got " +
        g17(cfg.domain.collar_depth));

  if (!(cfg.s >= 1.0)) bad("weight.s must satisfy 1 <= s: got " + g17(cfg.s));
  for (double si : cfg.species_s)
    if (!(si >= 1.0))
      bad("weight.species_s entries must satisfy 1 <= s: got " + g17(si));

  if (cfg.n_collar < 2) bad("mesh.n_collar must be at least 2");
  if (cfg.n_interior < 1) bad("mesh.n_interior must be at least 1");
  if (!(cfg.tau_max > 0.0)) bad("mesh.tau_max must be positive: got " + g17(cfg.tau_max));
  if (cfg.boundary_resolution < 1) bad("mesh.boundary_resolution must be at least 1");
  if (cfg.domain.kind == DomainKind::Interval && cfg.boundary_resolution != 1)
    bad("mesh.boundary_resolution must be 1 on the interval");

  int n_species = 0;
  if (builtin_params().count(cfg.model)) {
    n_species = config_species_count(cfg.model);
    for (const auto& [name, dflt] : builtin_params().at(cfg.model)) {
      (void)dflt;
      if (!cfg.model_params.count(name))
        bad("model." + name + " missing for builtin '" + cfg.model + "'");
    }
    for (const auto& [name, value] : cfg.model_params) {
      if (!builtin_params().at(cfg.model).count(name))
        bad("model." + name + " is not a parameter of builtin '" + cfg.model + "'");
      if (!std::isfinite(value))
        bad("model." + name + " must be finite: got " + g17(value));
    }
    if (cfg.model == "porous_media" && cfg.model_params.count("alpha") &&
        cfg.model_params.at("alpha") == 0.0)
      bad("model.alpha must be nonzero for porous_media (zero is the constant-"
          "coefficient case; use logistic)");
  } else {
    bad("model.name must be one of logistic, porous_media, two_population: got '" +
        cfg.model + "'");
  }

  if (n_species > 0) {
    if (!cfg.species_s.empty() &&
        static_cast<int>(cfg.species_s.size()) != n_species)
      bad("weight.species_s needs one entry per species (" +
          std::to_string(n_species) + "): got " + std::to_string(cfg.species_s.size()));
    if (!cfg.x_lower.empty() && static_cast<int>(cfg.x_lower.size()) != n_species)
      bad("model.x_lower needs one entry per species (" + std::to_string(n_species) +
          "): got " + std::to_string(cfg.x_lower.size()));
    if (!cfg.x_upper.empty() && static_cast<int>(cfg.x_upper.size()) != n_species)
      bad("model.x_upper needs one entry per species (" + std::to_string(n_species) +
          "): got " + std::to_string(cfg.x_upper.size()));
    if (static_cast<int>(cfg.initial_values.size()) != n_species)
      bad("initial.values needs one entry per species (" + std::to_string(n_species) +
          "): got " + std::to_string(cfg.initial_values.size()));

    // effective state box: overrides where given, builtin bounds elsewhere
    std::vector<double> lo(static_cast<std::size_t>(n_species), 0.0);
    std::vector<double> hi(static_cast<std::size_t>(n_species),
                           std::numeric_limits<double>::infinity());
    if (static_cast<int>(cfg.x_lower.size()) == n_species) lo = cfg.x_lower;
    if (static_cast<int>(cfg.x_upper.size()) == n_species) hi = cfg.x_upper;
    for (int j = 0; j < n_species; ++j) {
      if (!(lo[j] < hi[j]))
        bad("model state box must have x_lower < x_upper per species");
      if (static_cast<int>(cfg.initial_values.size()) == n_species) {
        const double u = cfg.initial_values[j];
        if (!(std::isfinite(u) && u > lo[j] && u < hi[j]))
          bad("initial.values[" + std::to_string(j) +
              "] must lie strictly inside the state box: got " + g17(u));
      }
    }
  }

  const SolverConfig& sc = cfg.solver;
  if (!(sc.dt_init > 0.0)) bad("solver.dt_init must be positive: got " + g17(sc.dt_init));
  if (!(sc.dt_min > 0.0)) bad("solver.dt_min must be positive: got " + g17(sc.dt_min));
  if (!(sc.dt_max > 0.0)) bad("solver.dt_max must be positive: got " + g17(sc.dt_max));
  if (sc.dt_min > 0.0 && sc.dt_init > 0.0 && sc.dt_max > 0.0 &&
      !(sc.dt_min <= sc.dt_init && sc.dt_init <= sc.dt_max))
    bad("solver step sizes must satisfy dt_min <= dt_init <= dt_max");
  if (!(sc.t_final > 0.0)) bad("solver.t_final must be positive: got " + g17(sc.t_final));
  if (!(sc.delta_x > 0.0)) bad("solver.delta_x must be positive: got " + g17(sc.delta_x));
  if (!(sc.norm_max > 0.0)) bad("solver.norm_max must be positive: got " + g17(sc.norm_max));
  const int m = cfg.domain.dimension();
  if (!(sc.p > m + 2))
    bad("solver.p must satisfy p > m + 2 (spatial dimension m = " + std::to_string(m) +
        "): got " + g17(sc.p));
  if (sc.newton.max_iters < 1) bad("solver.newton_max_iters must be at least 1");
  if (!(sc.newton.tol > 0.0))
    bad("solver.newton_tol must be positive: got " + g17(sc.newton.tol));

  if (cfg.output.directory.empty()) bad("output.directory must not be empty");
  if (cfg.output.snapshot_stride < 0) bad("output.snapshot_stride must be non-negative");
  if (cfg.output.formats.empty()) bad("output.formats must not be empty");
  for (const std::string& f : cfg.output.formats)
    if (f != "csv") bad("output.formats supports only csv: got '" + f + "'");

  return v;
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << "[domain]\n";
  os << "kind = " << (cfg.domain.kind == DomainKind::Interval ? "interval" : "disk")
     << '\n';
  os << "extent = " << g17(cfg.domain.extent) << '\n';
  os << "collar_depth = " << g17(cfg.domain.collar_depth) << '\n';

  os << "\n[weight]\n";
  os << "s = " << g17(cfg.s) << '\n';
  if (!cfg.species_s.empty()) os << "species_s = " << list_to_text(cfg.species_s) << '\n';

  os << "\n[mesh]\n";
  os << "n_collar = " << cfg.n_collar << '\n';
  os << "n_interior = " << cfg.n_interior << '\n';
  os << "tau_max = " << g17(cfg.tau_max) << '\n';
  os << "boundary_resolution = " << cfg.boundary_resolution << '\n';

  os << "\n[model]\n";
  os << "name = " << cfg.model << '\n';
  for (const auto& [name, value] : cfg.model_params)
    os << name << " = " << g17(value) << '\n';
  if (!cfg.x_lower.empty()) os << "x_lower = " << list_to_text(cfg.x_lower) << '\n';
  if (!cfg.x_upper.empty()) os << "x_upper = " << list_to_text(cfg.x_upper) << '\n';

  os << "\n[initial]\n";
  if (!cfg.initial_values.empty())
    os << "values = " << list_to_text(cfg.initial_values) << '\n';

  const SolverConfig& sc = cfg.solver;
  os << "\n[solver]\n";
  os << "dt_init = " << g17(sc.dt_init) << '\n';
  os << "dt_min = " << g17(sc.dt_min) << '\n';
  os << "dt_max = " << g17(sc.dt_max) << '\n';
  os << "t_final = " << g17(sc.t_final) << '\n';
  os << "p = " << g17(sc.p) << '\n';
  os << "delta_x = " << g17(sc.delta_x) << '\n';
  os << "norm_max = " << g17(sc.norm_max) << '\n';
  os << "newton = " << (sc.newton.enabled ? "true" : "false") << '\n';
  os << "newton_max_iters = " << sc.newton.max_iters << '\n';
  os << "newton_tol = " << g17(sc.newton.tol) << '\n';

  os << "\n[output]\n";
  os << "directory = " << cfg.output.directory << '\n';
  os << "snapshot_stride = " << cfg.output.snapshot_stride << '\n';
  std::string fmts;
  for (std::size_t i = 0; i < cfg.output.formats.size(); ++i) {
    if (i) fmts += ", ";
    fmts += cfg.output.formats[i];
  }
  os << "formats = " << fmts << '\n';
  return os.str();
}

WeightProfile make_weight(const RunConfig& cfg) {
  return build_weight_profile(cfg.domain.collar_depth, cfg.s);
}

Mesh make_run_mesh(const RunConfig& cfg) {
  return build_mesh(cfg.domain, make_weight(cfg), cfg.n_collar, cfg.n_interior,
                    cfg.tau_max, cfg.boundary_resolution);
}

ModelSpec make_model(const RunConfig& cfg) {
  ModelSpec m;
  if (cfg.model == "logistic") {
    m = builtin_logistic(param(cfg, "alpha"), param(cfg, "lambda"), param(cfg, "a"));
  } else if (cfg.model == "porous_media") {
    const double growth = param(cfg, "growth");
    m = builtin_porous_media(param(cfg, "alpha"),
                             [growth](const CellPos&, double) { return growth; });
  } else if (cfg.model == "two_population") {
    TwoPopulationParams p;
    p.a = constant_fn(param(cfg, "a"));
    p.b = constant_fn(param(cfg, "b"));
    p.a0 = constant_fn(param(cfg, "a0"));
    p.a1 = constant_fn(param(cfg, "a1"));
    p.a2 = constant_fn(param(cfg, "a2"));
    p.b0 = constant_fn(param(cfg, "b0"));
    p.b1 = constant_fn(param(cfg, "b1"));
    p.b2 = constant_fn(param(cfg, "b2"));
    p.alpha = param(cfg, "alpha");
    p.beta = param(cfg, "beta");
    p.gamma = param(cfg, "gamma");
    p.delta = param(cfg, "delta");
    m = builtin_two_population(p);
  } else {
    throw std::invalid_argument("unknown model name: " + cfg.model);
  }
  if (!cfg.species_s.empty()) m.per_species_s = cfg.species_s;
  if (!cfg.x_lower.empty()) m.X.lower = cfg.x_lower;
  if (!cfg.x_upper.empty()) m.X.upper = cfg.x_upper;
  validate_model(m);
  return m;
}

Field make_initial_field(const RunConfig& cfg, const Mesh& mesh) {
  return make_constant_field(mesh, cfg.initial_values);
}

}  // namespace sdrd
