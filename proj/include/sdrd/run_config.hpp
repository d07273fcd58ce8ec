#pragma once

// Flat sectioned key-value run configuration: one [section] level, `key =
// value` lines, `#` comments. Unknown sections, unknown keys and duplicate
// keys are hard errors; omitted keys take documented defaults. Parsing
// canonicalizes the result (model parameters completed with their defaults),
// so serialize followed by parse is the identity on parsed configs.

#include <map>
#include <string>
#include <vector>

#include "sdrd/fields.hpp"
#include "sdrd/geometry.hpp"
#include "sdrd/models.hpp"
#include "sdrd/solver.hpp"

namespace sdrd {

struct OutputConfig {
  std::string directory = "out";
  int snapshot_stride = 0;  // 0: no periodic snapshots, initial and final only
  std::vector<std::string> formats = {"csv"};

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
  DomainSpec domain;

  // weight block; species_s empty means every species uses the base exponent
  double s = 1.0;
  std::vector<double> species_s;

  // mesh block; boundary_resolution is the angular cell count per boundary
  // component and must be 1 on the interval
  int n_collar = 32;
  int n_interior = 16;
  double tau_max = 2.0;
  int boundary_resolution = 1;

  // model block: builtin name, its full parameter set, optional state box
  // overrides (empty vector keeps the builtin bound on that side)
  std::string model = "logistic";
  std::map<std::string, double> model_params;
  std::vector<double> x_lower, x_upper;

  // constant initial value per species
  std::vector<double> initial_values;

  SolverConfig solver;
  OutputConfig output;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Parses and fully validates. Structural problems (unknown key, bad literal)
// throw immediately with line context; semantic violations are collected and
// thrown as one std::invalid_argument listing every violated constraint.
RunConfig parse_config(const std::string& text);

// Every violated semantic constraint of an already-structured config; empty
// means valid.
std::vector<std::string> config_violations(const RunConfig& cfg);

// Canonical text form: every key explicit, doubles at 17 significant digits.
std::string serialize_config(const RunConfig& cfg);

int config_species_count(const std::string& model_name);  // throws on unknown name

WeightProfile make_weight(const RunConfig& cfg);
Mesh make_run_mesh(const RunConfig& cfg);
ModelSpec make_model(const RunConfig& cfg);
Field make_initial_field(const RunConfig& cfg, const Mesh& mesh);

}  // namespace sdrd
