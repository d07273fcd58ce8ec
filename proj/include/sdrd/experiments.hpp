#pragma once

// Scripted studies that turn qualitative behavior of the degenerate model
// into measurable desk-scale checks: boundary flux decay rates, exact mass
// conservation, the contrast with a classical Dirichlet solver, sensitivity
// to the collar truncation depth, and the run exit alternatives. Each study
// returns a report whose verdict is a pure function of its measurements.

#include <string>
#include <utility>
#include <vector>

#include "sdrd/operators.hpp"
#include "sdrd/solver.hpp"

namespace sdrd {

struct Measurement {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  std::string relation;  // how value stands against tolerance: "<=", ">=", "<", ">"
  bool pass = false;
};

struct StudyReport {
  std::string study;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<Measurement> measurements;
  std::vector<std::pair<std::string, std::string>> data_files;  // file name -> csv text
  bool pass = false;
};

// All measurements pass; reports set their verdict through this.
bool study_verdict(const std::vector<Measurement>& ms);

// Applies the declared relation; used by the studies for every measurement.
Measurement make_measurement(std::string name, double value, double tolerance,
                             std::string relation);

// Least-squares slope of log|flux| against log y over samples with
// 0 < y <= y_max, dropping drop_deepest samples of smallest y (truncation
// pollution). Throws std::invalid_argument when fewer than three samples
// survive or a surviving flux value is not positive.
double fit_loglog_slope(const std::vector<FluxSample>& samples, double y_max,
                        int drop_deepest);

// Logistic relaxation per exponent; fits the decay rate of the boundary-normal
// flux over the exact-weight zone. Verdict: slope(s) >= s - 0.2, slopes
// strictly increasing in s, and disk tangential flux not decaying with depth
// (successive-layer ratios within [1/2, 2]).
StudyReport flux_decay_study(const std::vector<double>& s_values);

// Reaction-free runs; reports the relative drift of the volume-weighted mass
// per duration, per species, and across a step-size pair. Verdict at 1e-10.
StudyReport conservation_study(const std::vector<double>& durations);

// Runs a self-contained classical Dirichlet finite-difference logistic solver
// against the degenerate solver from the same flat start u0 = lambda/2.
// Verdict: the classical solution respects the [0, lambda] barrier and
// vanishes on the boundary; the degenerate solution reaches lambda in the
// interior with no boundary decay layer.
StudyReport classical_comparison_study(double lambda);

// Final interior states on meshes truncated at each tau value against the
// tau_reference run. Verdict: differences decrease monotonically in tau and
// the largest tau comes within 1e-4; a deep-collar initial bump is reported
// as the high-sensitivity series.
StudyReport truncation_study(const std::vector<double>& tau_values,
                             double tau_reference);

// Three scripted runs, one per exit alternative: budget completion, approach
// to the state-space boundary at the predicted decay time, norm divergence
// under strong growth. Verdict: each run returns its designated exit.
StudyReport exit_alternative_study();

// Writes report.json and every data file into dir (created if missing).
void write_study_report(const StudyReport& r, const std::string& dir);

std::string study_report_to_json(const StudyReport& r);

}  // namespace sdrd
