#include "sdrd/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdrd {

namespace {

constexpr std::size_t kNormWindow = 8;  // trailing accepted-step norms kept for the stall detector
constexpr double kGrowth = 1.2;      // dt growth factor after an accepted step
constexpr double kCgTol = 1e-12;     // relative residual for the 2D diffusion solve
constexpr long kMaxSteps = 10000000; // hard cap; detectors fire long before this

void check_positive_finite(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string("solver config: ") + name + " must be positive and finite");
}

// Per-species weight profiles on the shared mesh; empty spec means every
// species runs with the base profile.
std::vector<WeightProfile> species_profiles(const ModelSpec& model, const WeightProfile& w) {
  std::vector<WeightProfile> out;
  if (model.per_species_s.empty()) {
    out.assign(static_cast<std::size_t>(model.n_species), w);
    return out;
  }
  if (w.is_unit())
    throw std::invalid_argument("per-species exponents require a weighted base profile");
  out.reserve(model.per_species_s.size());
  for (double si : model.per_species_s)
    out.push_back(si == w.s() ? w : build_weight_profile(w.epsilon(), si));
  return out;
}

// Implicit diffusion system for one species: (V + dt V A) delta = -dt V A u~.
// V A is symmetric positive semidefinite by construction, so the system is
// symmetric positive definite.
Eigen::SparseMatrix<double> diffusion_system(const OperatorMatrix& op, double dt) {
  Eigen::SparseMatrix<double> m = op.vol.asDiagonal() * op.A;
  m *= dt;
  for (int i = 0; i < m.rows(); ++i) m.coeffRef(i, i) += op.vol[i];
  m.makeCompressed();
  return m;
}

// Direct factorization in 1D, preconditioned conjugate gradients in 2D. The
// iterative solver only references its matrix, so the system is stored here.
struct DiffusionSolve {
  bool direct = true;
  Eigen::SparseMatrix<double> sys;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double>> cg;

  bool compute(Eigen::SparseMatrix<double>&& m, bool use_direct) {
    direct = use_direct;
    sys = std::move(m);
    if (direct) {
      ldlt.compute(sys);
      return ldlt.info() == Eigen::Success;
    }
    cg.setTolerance(kCgTol);
    cg.setMaxIterations(10 * sys.rows());
    cg.compute(sys);
    return cg.info() == Eigen::Success;
  }

  bool solve(const Eigen::VectorXd& rhs, Eigen::VectorXd& out) const {
    if (direct) {
      out = ldlt.solve(rhs);
    } else {
      out = cg.solve(rhs);
      if (cg.info() != Eigen::Success) return false;
    }
    return out.allFinite();
  }
};

double volume_weighted_norm(const Eigen::ArrayXXd& v, const Eigen::VectorXd& vol) {
  double acc = 0.0;
  for (int j = 0; j < v.cols(); ++j)
    acc += (vol.array() * v.col(j).square()).sum();
  return std::sqrt(acc);
}

struct Attempt {
  Eigen::ArrayXXd u;
  int newton_iters = 0;
};

// One linearly implicit step of size dt from u^n; nullopt requests rejection.
std::optional<Attempt> attempt_step(const Field& un, double dt, const ModelSpec& model,
                                    const std::vector<WeightProfile>& profs,
                                    const SolverConfig& cfg) {
  const Mesh& mesh = *un.mesh;
  const int nsp = model.n_species;
  const int nc = mesh.n_cells();
  const bool direct = mesh.domain.dimension() == 1;

  Field a_n;
  try {
    a_n = eval_coefficients(model, un);
  } catch (const std::domain_error&) {
    return std::nullopt;
  }

  // Reaction half: exact per-cell solve of (I - dt g(u^n)) u~ = u^n. The LU
  // factors double as the reaction part of the Newton preconditioner.
  Eigen::ArrayXXd ut(nc, nsp);
  std::vector<Eigen::FullPivLU<Eigen::MatrixXd>> cell_lu;
  if (cfg.newton.enabled) cell_lu.reserve(static_cast<std::size_t>(nc));
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(nsp, nsp);
  for (int c = 0; c < nc; ++c) {
    const CellPos x{mesh.cells[c].x1, mesh.cells[c].x2};
    const Eigen::VectorXd row = un.values.row(c).matrix().transpose();
    Eigen::MatrixXd g;
    try {
      g = reaction_matrix(model, x, row);
    } catch (const std::domain_error&) {
      return std::nullopt;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(eye - dt * g);
    if (!lu.isInvertible()) return std::nullopt;
    const Eigen::VectorXd sol = lu.solve(row);
    if (!sol.allFinite()) return std::nullopt;
    ut.row(c) = sol.transpose().array();
    if (cfg.newton.enabled) cell_lu.push_back(std::move(lu));
  }

  // Diffusion half per species, increment form against the species metric
  // volumes; reused as the diffusion part of the Newton preconditioner.
  Eigen::ArrayXXd unew(nc, nsp);
  std::vector<OperatorMatrix> ops(static_cast<std::size_t>(nsp));
  std::vector<DiffusionSolve> solves(static_cast<std::size_t>(nsp));
  for (int j = 0; j < nsp; ++j) {
    const Eigen::VectorXd a_j = a_n.values.col(j).matrix();
    ops[j] = assemble_As(a_j, profs[static_cast<std::size_t>(j)], mesh);
    if (!solves[j].compute(diffusion_system(ops[j], dt), direct)) return std::nullopt;
    const Eigen::VectorXd ut_j = ut.col(j).matrix();
    const Eigen::VectorXd rhs = -dt * (ops[j].vol.array() * (ops[j].A * ut_j).array()).matrix();
    Eigen::VectorXd delta;
    if (!solves[j].solve(rhs, delta)) return std::nullopt;
    unew.col(j) = ut.col(j) + delta.array();
  }

  int iters = 0;
  if (cfg.newton.enabled) {
    // Fully implicit residual R(v) = v - u^n + dt (A(v) v - g(v) v), driven by
    // the frozen-coefficient split solve as preconditioner. Any residual
    // non-decrease rejects the step.
    const Eigen::VectorXd vol = mesh.volumes();
    const double scale = volume_weighted_norm(un.values, vol) + 1.0;
    Field v;
    v.mesh = un.mesh;
    v.values = unew;

    auto residual = [&](const Field& state, Eigen::ArrayXXd& r) -> bool {
      if (!state.values.allFinite() || !in_state_space(state, model.X)) return false;
      Field av, fv;
      try {
        av = eval_coefficients(model, state);
        fv = eval_reaction(model, state);
      } catch (const std::domain_error&) {
        return false;
      }
      r.resize(nc, nsp);
      for (int j = 0; j < nsp; ++j) {
        const OperatorMatrix opv =
            assemble_As(av.values.col(j).matrix(), profs[static_cast<std::size_t>(j)], mesh);
        const Eigen::VectorXd vj = state.values.col(j).matrix();
        r.col(j) = state.values.col(j) - un.values.col(j) +
                   dt * ((opv.A * vj).array() - fv.values.col(j));
      }
      return true;
    };

    Eigen::ArrayXXd r;
    if (!residual(v, r)) return std::nullopt;
    double rnorm = volume_weighted_norm(r, vol);
    while (rnorm > cfg.newton.tol * scale && iters < cfg.newton.max_iters) {
      Eigen::ArrayXXd z(nc, nsp);
      for (int j = 0; j < nsp; ++j) {
        const Eigen::VectorXd rhs = (ops[j].vol.array() * r.col(j)).matrix();
        Eigen::VectorXd wj;
        if (!solves[j].solve(rhs, wj)) return std::nullopt;
        z.col(j) = wj.array();
      }
      for (int c = 0; c < nc; ++c) {
        const Eigen::VectorXd zr = cell_lu[static_cast<std::size_t>(c)]
                                       .solve(z.row(c).matrix().transpose());
        if (!zr.allFinite()) return std::nullopt;
        z.row(c) = zr.transpose().array();
      }
      v.values -= z;
      ++iters;
      if (!residual(v, r)) return std::nullopt;
      const double next = volume_weighted_norm(r, vol);
      if (next >= rnorm) return std::nullopt;
      rnorm = next;
    }
    unew = v.values;
  }

  Field out;
  out.mesh = un.mesh;
  out.values = std::move(unew);
  if (!out.values.allFinite() || !in_state_space(out, model.X)) return std::nullopt;
  return Attempt{std::move(out.values), iters};
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration and state
// ---------------------------------------------------------------------------

void validate_solver_config(const SolverConfig& cfg, int dim) {
  check_positive_finite(cfg.dt_init, "dt_init");
  check_positive_finite(cfg.dt_min, "dt_min");
  check_positive_finite(cfg.dt_max, "dt_max");
  check_positive_finite(cfg.t_final, "t_final");
  check_positive_finite(cfg.delta_x, "delta_x");
  check_positive_finite(cfg.norm_max, "norm_max");
  check_positive_finite(cfg.p, "p");
  if (cfg.dt_min > cfg.dt_init || cfg.dt_init > cfg.dt_max)
    throw std::invalid_argument("solver config: require dt_min <= dt_init <= dt_max");
  if (!(cfg.p > static_cast<double>(dim) + 2.0))
    throw std::invalid_argument("solver config: norm exponent p must exceed the spatial dimension plus 2");
  if (cfg.newton.enabled) {
    if (cfg.newton.max_iters < 1)
      throw std::invalid_argument("solver config: newton.max_iters must be at least 1");
    check_positive_finite(cfg.newton.tol, "newton.tol");
  }
}

std::string exit_kind_name(ExitKind k) {
  switch (k) {
    case ExitKind::CompletedBudget: return "completed_budget";
    case ExitKind::StateBoundaryApproach: return "state_boundary_approach";
    case ExitKind::NormDivergence: return "norm_divergence";
    case ExitKind::StepCollapse: return "step_collapse";
  }
  return "unknown";
}

SimulationState make_initial_state(const Field& u0, const ModelSpec& model,
                                   const WeightProfile& w, const SolverConfig& cfg) {
  if (u0.mesh == nullptr) throw std::invalid_argument("initial field has no mesh");
  validate_solver_config(cfg, u0.mesh->domain.dimension());
  validate_model(model);
  if (u0.n_species() != model.n_species)
    throw std::invalid_argument("species count mismatch between initial field and model");
  if (!u0.values.allFinite())
    throw std::invalid_argument("initial data inadmissible: values are not finite");
  if (!in_state_space(u0, model.X))
    throw std::invalid_argument("initial data inadmissible: outside the state space");
  const double dist = dist_to_state_boundary(u0, model.X);
  if (!(dist > cfg.delta_x))
    throw std::invalid_argument("initial data inadmissible: within delta_x of the state-space boundary");
  const double nrm = weighted_sobolev_norm(u0, 2, cfg.p, w);
  if (!std::isfinite(nrm))
    throw std::invalid_argument("initial data inadmissible: norm is not finite");

  SimulationState s;
  s.t = 0.0;
  s.u = u0;
  s.dt = cfg.dt_init;
  s.step_count = 0;
  s.last_norm = nrm;
  s.last_min_dist = dist;
  s.norm_tail = {nrm};
  return s;
}

// ---------------------------------------------------------------------------
// stepping
// ---------------------------------------------------------------------------

StepOutcome step(const SimulationState& s, const ModelSpec& model,
                 const WeightProfile& w, const SolverConfig& cfg) {
  if (s.u.mesh == nullptr) throw std::invalid_argument("state field has no mesh");
  const double remaining = cfg.t_final - s.t;
  if (!(remaining > 0.0)) throw std::logic_error("step called past the time budget");

  const std::vector<WeightProfile> profs = species_profiles(model, w);

  StepOutcome out;
  double dt_try = std::min({s.dt, remaining, cfg.dt_max});
  for (;;) {
    std::optional<Attempt> a = attempt_step(s.u, dt_try, model, profs, cfg);
    if (a.has_value()) {
      SimulationState ns;
      ns.t = s.t + dt_try;
      if (cfg.t_final - ns.t <= 1e-12 * std::max(1.0, cfg.t_final)) ns.t = cfg.t_final;
      ns.u.mesh = s.u.mesh;
      ns.u.values = std::move(a->u);
      ns.dt = std::min(dt_try * kGrowth, cfg.dt_max);
      ns.step_count = s.step_count + 1;
      ns.last_norm = weighted_sobolev_norm(ns.u, 2, cfg.p, w);
      ns.last_min_dist = dist_to_state_boundary(ns.u, model.X);
      ns.norm_tail = s.norm_tail;
      ns.norm_tail.push_back(ns.last_norm);
      if (ns.norm_tail.size() > kNormWindow)
        ns.norm_tail.erase(ns.norm_tail.begin(),
                           ns.norm_tail.end() - static_cast<long>(kNormWindow));
      out.state = std::move(ns);
      out.newton_iters = a->newton_iters;
      return out;
    }
    ++out.rejections;
    dt_try *= 0.5;
    if (dt_try < cfg.dt_min) {
      out.state = s;
      out.collapsed = true;
      out.dt_at_collapse = dt_try;
      return out;
    }
  }
}

std::optional<ExitStatus> detect_exit(const SimulationState& s, const SolverConfig& cfg) {
  ExitStatus ex;
  ex.t = s.t;
  ex.min_dist = s.last_min_dist;
  ex.norm = s.last_norm;
  ex.dt = s.dt;

  if (s.t >= cfg.t_final) {
    ex.kind = ExitKind::CompletedBudget;
    return ex;
  }
  if (s.last_min_dist < cfg.delta_x) {
    ex.kind = ExitKind::StateBoundaryApproach;
    return ex;
  }
  if (s.last_norm > cfg.norm_max) {
    ex.kind = ExitKind::NormDivergence;
    ex.detail = "threshold";
    return ex;
  }
  // Cauchy stall: the step size has been ground down near dt_min while the
  // trailing norms still fluctuate; reported as divergence of the limit.
  if (s.norm_tail.size() >= kNormWindow && s.dt < 10.0 * cfg.dt_min) {
    const auto [mn, mx] = std::minmax_element(s.norm_tail.begin(), s.norm_tail.end());
    if (*mx > 0.0 && (*mx - *mn) / *mx > 0.5) {
      ex.kind = ExitKind::NormDivergence;
      ex.detail = "cauchy";
      return ex;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// run driver
// ---------------------------------------------------------------------------

RunResult run(const Field& u0, const ModelSpec& model, const WeightProfile& w,
              const SolverConfig& cfg, int snapshot_stride) {
  if (snapshot_stride < 0) throw std::invalid_argument("snapshot stride must be non-negative");

  RunResult res;
  SimulationState state = make_initial_state(u0, model, w, cfg);
  res.trajectory.push_back(state.u);
  res.times.push_back(state.t);

  for (long guard = 0;; ++guard) {
    if (guard > kMaxSteps) throw std::runtime_error("step limit exceeded");
    if (std::optional<ExitStatus> ex = detect_exit(state, cfg)) {
      res.exit = *ex;
      break;
    }
    StepOutcome out = step(state, model, w, cfg);
    if (out.collapsed) {
      res.exit.kind = ExitKind::StepCollapse;
      res.exit.t = state.t;
      res.exit.min_dist = state.last_min_dist;
      res.exit.norm = state.last_norm;
      res.exit.dt = out.dt_at_collapse;
      break;
    }
    const double dt_used = out.state.t - state.t;
    state = std::move(out.state);
    res.log.push_back({state.step_count, state.t, dt_used, state.last_norm,
                       state.last_min_dist, out.rejections});
    if (snapshot_stride > 0 && state.step_count % snapshot_stride == 0) {
      res.trajectory.push_back(state.u);
      res.times.push_back(state.t);
    }
  }

  if (res.times.empty() || res.times.back() != state.t) {
    res.trajectory.push_back(state.u);
    res.times.push_back(state.t);
  }
  res.final_state = std::move(state);
  return res;
}

double lipschitz_probe(const Field& u0, const Field& v0, double T,
                       const ModelSpec& model, const WeightProfile& w,
                       const SolverConfig& cfg) {
  if (u0.mesh == nullptr || u0.mesh != v0.mesh)
    throw std::invalid_argument("lipschitz probe requires two fields on the same mesh");
  if (u0.values.rows() != v0.values.rows() || u0.values.cols() != v0.values.cols())
    throw std::invalid_argument("lipschitz probe requires fields of matching shape");
  if (!(T > 0.0) || !std::isfinite(T))
    throw std::invalid_argument("lipschitz probe horizon must be positive and finite");

  Field diff;
  diff.mesh = u0.mesh;
  diff.values = u0.values - v0.values;
  const double denom = weighted_sobolev_norm(diff, 2, cfg.p, w);
  if (denom == 0.0) return 0.0;

  // Frozen step size keeps the two time grids aligned sample for sample.
  SolverConfig pcfg = cfg;
  pcfg.t_final = T;
  pcfg.dt_max = pcfg.dt_init;

  const RunResult ra = run(u0, model, w, pcfg, 1);
  const RunResult rb = run(v0, model, w, pcfg, 1);
  if (ra.exit.kind != ExitKind::CompletedBudget)
    throw std::runtime_error("lipschitz probe: first run exited early: " + exit_kind_name(ra.exit.kind));
  if (rb.exit.kind != ExitKind::CompletedBudget)
    throw std::runtime_error("lipschitz probe: second run exited early: " + exit_kind_name(rb.exit.kind));
  if (ra.times.size() != rb.times.size())
    throw std::runtime_error("lipschitz probe: time grids diverged");
  for (std::size_t k = 0; k < ra.times.size(); ++k)
    if (std::abs(ra.times[k] - rb.times[k]) > 1e-12 * std::max(1.0, T))
      throw std::runtime_error("lipschitz probe: time grids diverged");

  double ratio = 0.0;
  for (std::size_t k = 1; k < ra.times.size(); ++k) {
    diff.values = ra.trajectory[k].values - rb.trajectory[k].values;
    ratio = std::max(ratio, weighted_sobolev_norm(diff, 2, cfg.p, w) / denom);
  }
  return ratio;
}

}  // namespace sdrd
