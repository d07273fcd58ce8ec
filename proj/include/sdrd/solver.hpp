#pragma once

// Time integration of the quasilinear system by a linearly implicit Rothe
// scheme: per step, coefficients and the reaction matrix are frozen at the
// current state, the reaction half (I - dt g) u~ = u is solved exactly per
// cell, then each species takes an implicit diffusion half in increment form
// (V + dt V A) d = -dt V A u~, which conserves volume-weighted mass to solver
// residual. Optional Newton correction iterates the fully implicit residual
// with the frozen solve as preconditioner.
//
// A run terminates through exactly one exit alternative: the time budget, an
// approach to the state-space boundary, norm divergence, or step collapse.
// Detectors are evaluated in that fixed order; the alternatives are not
// mutually exclusive, the order is a reporting convention.

#include <optional>
#include <string>
#include <vector>

#include "sdrd/fields.hpp"
#include "sdrd/models.hpp"
#include "sdrd/operators.hpp"

namespace sdrd {

struct NewtonConfig {
  bool enabled = false;
  int max_iters = 10;
  double tol = 1e-10;

  friend bool operator==(const NewtonConfig&, const NewtonConfig&) = default;
};

struct SolverConfig {
  double dt_init = 1e-3;
  double dt_min = 1e-9;
  double dt_max = 1.0;
  double t_final = 1.0;
  NewtonConfig newton;
  double delta_x = 1e-6;   // state-boundary exit threshold
  double norm_max = 1e8;   // norm-divergence exit threshold
  double p = 0.0;          // norm exponent, must exceed dimension + 2

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

// Throws std::invalid_argument; dim is the spatial dimension of the domain.
void validate_solver_config(const SolverConfig& cfg, int dim);

struct SimulationState {
  double t = 0.0;
  Field u;
  double dt = 0.0;        // step size the next attempt starts from
  long step_count = 0;
  double last_norm = 0.0;      // order-2 weighted Sobolev norm of u
  double last_min_dist = 0.0;  // distance of the state to the boundary of X
  std::vector<double> norm_tail;  // trailing accepted-step norms, newest last
};

enum class ExitKind {
  CompletedBudget,
  StateBoundaryApproach,
  NormDivergence,
  StepCollapse
};

std::string exit_kind_name(ExitKind k);

struct ExitStatus {
  ExitKind kind = ExitKind::CompletedBudget;
  double t = 0.0;
  double min_dist = 0.0;
  double norm = 0.0;
  double dt = 0.0;
  std::string detail;  // norm divergence: "threshold" or "cauchy"
};

// Initial state with diagnostics; rejects data outside X, closer to the
// boundary of X than delta_x, or with a non-finite norm.
SimulationState make_initial_state(const Field& u0, const ModelSpec& model,
                                   const WeightProfile& w, const SolverConfig& cfg);

struct StepOutcome {
  SimulationState state;
  bool collapsed = false;       // dt halving fell below dt_min before acceptance
  double dt_at_collapse = 0.0;  // the sub-dt_min value that triggered the collapse
  int rejections = 0;
  int newton_iters = 0;
};

// One accepted step (or a collapse report). The attempted dt is clamped so the
// run lands exactly on t_final; a step is rejected and dt halved when the new
// state leaves X, a linear solve fails, or the Newton residual stops
// decreasing. Accepted steps grow dt by 1.2x up to dt_max.
StepOutcome step(const SimulationState& s, const ModelSpec& model,
                 const WeightProfile& w, const SolverConfig& cfg);

// First firing detector in the fixed order budget, state-boundary,
// norm-divergence; nullopt while the run is healthy.
std::optional<ExitStatus> detect_exit(const SimulationState& s,
                                      const SolverConfig& cfg);

struct StepLogEntry {
  long step = 0;
  double t = 0.0;
  double dt = 0.0;    // accepted step size
  double norm = 0.0;
  double min_dist = 0.0;
  int rejections = 0;
};

struct RunResult {
  std::vector<Field> trajectory;  // thinned snapshots, first = initial data
  std::vector<double> times;      // snapshot times
  std::vector<StepLogEntry> log;  // one entry per accepted step
  ExitStatus exit;
  SimulationState final_state;
};

// Advances from u0 until one exit alternative fires. snapshot_stride = 0 keeps
// only the initial and final states; k > 0 snapshots every k accepted steps.
RunResult run(const Field& u0, const ModelSpec& model, const WeightProfile& w,
              const SolverConfig& cfg, int snapshot_stride = 0);

// Max over common sample times in (0, T] of |u(t) - v(t)| / |u0 - v0| in the
// order-2 weighted Sobolev norm, both runs advanced with the frozen step size
// cfg.dt_init. Returns 0 for identical inputs; throws when either run exits
// before T or the two time grids fail to stay aligned.
double lipschitz_probe(const Field& u0, const Field& v0, double T,
                       const ModelSpec& model, const WeightProfile& w,
                       const SolverConfig& cfg);

}  // namespace sdrd
