#include "doctest.h"
#include "sdrd/solver.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace sdrd;

namespace {

struct Rig1D {
  DomainSpec dom{DomainKind::Interval, 2.0, 0.5};
  WeightProfile w = build_weight_profile(0.5, 1.0);
  Mesh mesh = build_mesh(dom, w, 8, 8, 2.0);
};

struct RigDisk {
  DomainSpec dom{DomainKind::Disk, 1.0, 0.3};
  WeightProfile w = build_weight_profile(0.3, 1.0);
  Mesh mesh = build_mesh(dom, w, 6, 4, 2.0, 8);
};

SolverConfig base_cfg(double t_final, double dt, double dt_max = 0.0) {
  SolverConfig c;
  c.dt_init = dt;
  c.dt_min = std::min(1e-9, dt);
  c.dt_max = dt_max > 0.0 ? dt_max : dt;
  c.t_final = t_final;
  c.p = 5.0;
  return c;
}

ModelSpec pure_diffusion(int n_species, std::vector<double> diffusivity, StateSpaceX X) {
  ModelSpec m;
  m.name = "diffusion";
  m.n_species = n_species;
  m.X = std::move(X);
  for (double d : diffusivity)
    m.a.push_back([d](const CellPos&, const Eigen::VectorXd&) { return d; });
  m.g = [n_species](const CellPos&, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Zero(n_species, n_species);
  };
  return m;
}

// Single species, unit growth u' = u, confined to the open box (0, 1).
ModelSpec boxed_growth() {
  ModelSpec m;
  m.name = "boxed_growth";
  m.n_species = 1;
  m.X.lower = {0.0};
  m.X.upper = {1.0};
  m.a = {[](const CellPos&, const Eigen::VectorXd&) { return 1.0; }};
  m.g = [](const CellPos&, const Eigen::VectorXd&) {
    Eigen::MatrixXd g(1, 1);
    g << 1.0;
    return g;
  };
  return m;
}

Field bump_field(const Mesh& mesh, double base, double amp, double width) {
  Field f = make_field(mesh, 1);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Cell& cell = mesh.cells[c];
    double d2;
    if (mesh.domain.kind == DomainKind::Interval) {
      const double mid = mesh.domain.extent / 2.0;
      d2 = (cell.x1 - mid) * (cell.x1 - mid);
    } else {
      d2 = cell.x1 * cell.x1 + cell.x2 * cell.x2;
    }
    f.values(c, 0) = base + amp * std::exp(-d2 / (width * width));
  }
  return f;
}

double species_mass(const Mesh& mesh, const Field& u, int j) {
  return (mesh.volumes().array() * u.values.col(j)).sum();
}

}  // namespace

TEST_CASE("constant states under pure diffusion are fixed points") {
  Rig1D rig;
  ModelSpec m = pure_diffusion(1, {1.0}, StateSpaceX::positive_orthant(1));
  Field u0 = make_constant_field(rig.mesh, {0.7});

  RunResult r = run(u0, m, rig.w, base_cfg(10.0, 0.5));
  CHECK(r.exit.kind == ExitKind::CompletedBudget);
  CHECK(r.exit.t == 10.0);
  CHECK((r.final_state.u.values - 0.7).abs().maxCoeff() <= 1e-13);
  CHECK(r.final_state.step_count == 20);
}

TEST_CASE("logistic equilibrium at capacity is preserved for any step size") {
  Rig1D rig;
  ModelSpec m = builtin_logistic(1.0, 1.0, 1.0);
  Field u0 = make_constant_field(rig.mesh, {1.0});

  // one step fixes the equilibrium for arbitrarily large dt
  for (double dt : {1e-3, 0.1, 5.0, 100.0}) {
    SimulationState s = make_initial_state(u0, m, rig.w, base_cfg(10.0 * dt, dt));
    StepOutcome o = step(s, m, rig.w, base_cfg(10.0 * dt, dt));
    REQUIRE(!o.collapsed);
    CHECK((o.state.u.values - 1.0).abs().maxCoeff() <= 1e-12);
  }

  // round-off stays put over long runs while |1 - dt a c| <= 1, the
  // perturbation factor of the frozen-coefficient linearization
  for (double dt : {1e-3, 0.1, 1.5}) {
    RunResult r = run(u0, m, rig.w, base_cfg(50.0 * dt, dt));
    CHECK(r.exit.kind == ExitKind::CompletedBudget);
    CHECK((r.final_state.u.values - 1.0).abs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("scalar growth follows the implicit recurrence and the exponential") {
  Rig1D rig;
  ModelSpec m = builtin_logistic(1.0, 1.0, 0.0);
  Field u0 = make_constant_field(rig.mesh, {0.5});
  const double dt = 1e-3;

  RunResult r = run(u0, m, rig.w, base_cfg(1.0, dt));
  CHECK(r.exit.kind == ExitKind::CompletedBudget);
  CHECK(r.final_state.step_count == 1000);

  // The frozen-reaction solve is scalar division, so the run reproduces the
  // implicit recurrence u_k = u_0 (1 - dt)^{-k} to accumulated round-off.
  const double scheme_exact = 0.5 * std::pow(1.0 - dt, -1000.0);
  const double got = r.final_state.u.values(0, 0);
  CHECK(std::abs(got - scheme_exact) / scheme_exact <= 1e-12);
  CHECK((r.final_state.u.values - got).abs().maxCoeff() <= 1e-13 * got);

  const double continuum = 0.5 * std::exp(1.0);
  CHECK(std::abs(got - continuum) / continuum <= 1e-3);
}

TEST_CASE("logistic approach to capacity matches the closed form") {
  Rig1D rig;
  ModelSpec m = builtin_logistic(1.0, 1.0, 1.0);
  Field u0 = make_constant_field(rig.mesh, {0.1});

  RunResult mid = run(u0, m, rig.w, base_cfg(1.0, 1e-3));
  const double closed = 1.0 / (1.0 + 9.0 * std::exp(-1.0));
  CHECK(mid.exit.kind == ExitKind::CompletedBudget);
  CHECK(std::abs(mid.final_state.u.values(0, 0) - closed) <= 2e-3 * closed);

  RunResult full = run(u0, m, rig.w, base_cfg(20.0, 1e-3));
  CHECK(full.exit.kind == ExitKind::CompletedBudget);
  CHECK((full.final_state.u.values - 1.0).abs().maxCoeff() <= 1e-3);

  // monotone approach from below
  RunResult traced = run(u0, m, rig.w, base_cfg(20.0, 1e-2), 100);
  double prev = 0.1;
  for (std::size_t k = 1; k < traced.trajectory.size(); ++k) {
    const double cur = traced.trajectory[k].values(0, 0);
    CHECK(cur > prev);
    CHECK(cur < 1.0);
    prev = cur;
  }
}

TEST_CASE("volume-weighted mass is conserved without reaction") {
  Rig1D rig;
  ModelSpec porous = builtin_porous_media(
      1.0, [](const CellPos&, double) { return 0.0; });
  Field u0 = bump_field(rig.mesh, 0.5, 0.4, 0.2);
  const double m0 = species_mass(rig.mesh, u0, 0);

  RunResult r = run(u0, porous, rig.w, base_cfg(1.2, 1e-3));
  CHECK(r.exit.kind == ExitKind::CompletedBudget);
  CHECK(r.final_state.step_count == 1200);
  const double m1 = species_mass(rig.mesh, r.final_state.u, 0);
  CHECK(std::abs(m1 - m0) / std::abs(m0) <= 1e-11);

  RigDisk disk;
  ModelSpec two = pure_diffusion(2, {1.0, 0.3}, StateSpaceX::positive_orthant(2));
  Field v0 = make_field(disk.mesh, 2);
  Field b = bump_field(disk.mesh, 0.5, 0.4, 0.3);
  v0.values.col(0) = b.values.col(0);
  v0.values.col(1) = 1.0 - 0.5 * b.values.col(0);
  const double ma = species_mass(disk.mesh, v0, 0);
  const double mb = species_mass(disk.mesh, v0, 1);

  RunResult rd = run(v0, two, disk.w, base_cfg(0.3, 1e-3));
  CHECK(rd.exit.kind == ExitKind::CompletedBudget);
  CHECK(rd.final_state.step_count == 300);
  CHECK(std::abs(species_mass(disk.mesh, rd.final_state.u, 0) - ma) / std::abs(ma) <= 1e-11);
  CHECK(std::abs(species_mass(disk.mesh, rd.final_state.u, 1) - mb) / std::abs(mb) <= 1e-11);
}

TEST_CASE("diffusion contracts the volume-weighted norm for any step size") {
  Rig1D rig;
  ModelSpec m = pure_diffusion(1, {1.0}, StateSpaceX::positive_orthant(1));
  Field u0 = bump_field(rig.mesh, 0.2, 1.3, 0.15);
  const Eigen::ArrayXd vol = rig.mesh.volumes().array();

  for (double dt : {5.0, 0.05}) {
    RunResult r = run(u0, m, rig.w, base_cfg(10.0 * dt, dt), 1);
    CHECK(r.exit.kind == ExitKind::CompletedBudget);
    double prev = std::sqrt((vol * u0.values.col(0).square()).sum());
    for (std::size_t k = 1; k < r.trajectory.size(); ++k) {
      const double cur = std::sqrt((vol * r.trajectory[k].values.col(0).square()).sum());
      CHECK(cur <= prev * (1.0 + 1e-12));
      prev = cur;
    }
  }
}

TEST_CASE("pure diffusion keeps positive data positive") {
  Rig1D rig;
  ModelSpec m = pure_diffusion(1, {1.0}, StateSpaceX::positive_orthant(1));
  Field u0 = bump_field(rig.mesh, 0.01, 2.0, 0.1);

  RunResult r = run(u0, m, rig.w, base_cfg(2.0, 0.1), 1);
  CHECK(r.exit.kind == ExitKind::CompletedBudget);
  for (const Field& snap : r.trajectory) CHECK(snap.values.minCoeff() > 0.0);
}

TEST_CASE("growth against a box wall collapses the step size") {
  Rig1D rig;
  ModelSpec m = boxed_growth();
  Field u0 = make_constant_field(rig.mesh, {0.9});

  SolverConfig cfg = base_cfg(50.0, 0.1, 0.5);
  cfg.dt_min = 1e-3;
  cfg.delta_x = 1e-12;

  RunResult r = run(u0, m, rig.w, cfg);
  CHECK(r.exit.kind == ExitKind::StepCollapse);
  CHECK(r.exit.dt < cfg.dt_min);
  CHECK(r.exit.dt > 0.0);
  CHECK(r.exit.t < 50.0);

  // every accepted state stayed inside the box, rejections notwithstanding
  CHECK(in_state_space(r.final_state.u, m.X));
  CHECK(r.final_state.u.values.maxCoeff() < 1.0);
  int rejected_steps = 0;
  for (const StepLogEntry& e : r.log) {
    CHECK(e.min_dist > 0.0);
    if (e.rejections > 0) ++rejected_steps;
  }
  CHECK(rejected_steps > 0);
}

TEST_CASE("state-boundary exit fires at the predicted decay time") {
  Rig1D rig;
  ModelSpec m = builtin_logistic(1.0, -0.5, 0.0);
  Field u0 = make_constant_field(rig.mesh, {0.1});

  SolverConfig cfg = base_cfg(30.0, 1e-3, 0.02);
  cfg.delta_x = 1e-3;

  RunResult r = run(u0, m, rig.w, cfg);
  CHECK(r.exit.kind == ExitKind::StateBoundaryApproach);
  const double predicted = 2.0 * std::log(100.0);  // u(t) = 0.1 e^{-t/2} crossing 1e-3
  CHECK(std::abs(r.exit.t - predicted) <= 0.1 * predicted);
  CHECK(r.exit.min_dist < cfg.delta_x);
  CHECK(r.exit.min_dist > 0.0);
  CHECK(in_state_space(r.final_state.u, m.X));
}

TEST_CASE("norm-divergence exit fires once the norm crosses the threshold") {
  Rig1D rig;
  ModelSpec m = builtin_logistic(1.0, 2.0, 0.0);
  Field u0 = make_constant_field(rig.mesh, {1.0});

  SolverConfig cfg = base_cfg(10.0, 1e-3, 0.05);
  cfg.norm_max = 40.0;

  const double n0 = make_initial_state(u0, m, rig.w, cfg).last_norm;
  REQUIRE(n0 > 0.0);
  REQUIRE(n0 < cfg.norm_max);

  RunResult r = run(u0, m, rig.w, cfg);
  CHECK(r.exit.kind == ExitKind::NormDivergence);
  CHECK(r.exit.detail == "threshold");
  CHECK(r.exit.norm > cfg.norm_max);
  CHECK(r.exit.t < 10.0);

  // continuum crossing at log(norm_max/n0)/2; the implicit recurrence with
  // dt = 0.05 grows at rate log(1/(1 - 2 dt))/dt instead
  const double target = std::log(cfg.norm_max / n0);
  const double lo = target / (std::log(1.0 / 0.9) / 0.05);
  const double hi = target / 2.0;
  CHECK(r.exit.t >= lo - 0.1);
  CHECK(r.exit.t <= hi + 0.1);
}

TEST_CASE("completed budget lands exactly on the final time") {
  Rig1D rig;
  ModelSpec m = builtin_logistic(1.0, 1.0, 1.0);
  Field u0 = make_constant_field(rig.mesh, {0.4});

  RunResult r = run(u0, m, rig.w, base_cfg(2.5, 0.3, 0.4), 3);
  CHECK(r.exit.kind == ExitKind::CompletedBudget);
  CHECK(r.exit.t == 2.5);
  CHECK(r.final_state.t == 2.5);
  CHECK(r.times.front() == 0.0);
  CHECK(r.times.back() == 2.5);
  for (const StepLogEntry& e : r.log) {
    CHECK(e.t <= 2.5);
    CHECK(e.dt <= 0.4 + 1e-15);
    CHECK(e.dt > 0.0);
  }
  CHECK(r.trajectory.size() == r.times.size());
}

TEST_CASE("exit detection follows the fixed reporting order") {
  SolverConfig cfg = base_cfg(5.0, 1e-3, 0.1);
  cfg.delta_x = 1e-6;
  cfg.norm_max = 1e3;

  SimulationState s;
  s.t = 5.0;
  s.dt = 0.1;
  s.last_min_dist = 1e-9;   // below delta_x
  s.last_norm = 1e9;        // above norm_max
  s.norm_tail = {1e9};

  // budget outranks both firing detectors
  std::optional<ExitStatus> ex = detect_exit(s, cfg);
  REQUIRE(ex.has_value());
  CHECK(ex->kind == ExitKind::CompletedBudget);
  CHECK(ex->t == 5.0);

  // boundary approach outranks norm divergence
  s.t = 4.0;
  ex = detect_exit(s, cfg);
  REQUIRE(ex.has_value());
  CHECK(ex->kind == ExitKind::StateBoundaryApproach);
  CHECK(ex->min_dist == 1e-9);

  s.last_min_dist = 1.0;
  ex = detect_exit(s, cfg);
  REQUIRE(ex.has_value());
  CHECK(ex->kind == ExitKind::NormDivergence);
  CHECK(ex->detail == "threshold");
  CHECK(ex->norm == 1e9);

  s.last_norm = 1.0;
  CHECK(!detect_exit(s, cfg).has_value());

  // stalled steps with fluctuating norms read as divergence of the limit
  s.norm_tail = {1.0, 3.0, 1.0, 3.0, 1.0, 3.0, 1.0, 3.0};
  s.dt = 5.0 * cfg.dt_min;  // below 10 dt_min
  ex = detect_exit(s, cfg);
  REQUIRE(ex.has_value());
  CHECK(ex->kind == ExitKind::NormDivergence);
  CHECK(ex->detail == "cauchy");

  s.dt = 0.1;  // healthy step size: same tail is not reported
  CHECK(!detect_exit(s, cfg).has_value());
}

TEST_CASE("lipschitz probe bounds") {
  Rig1D rig;

  SUBCASE("identical inputs give zero by convention") {
    ModelSpec m = builtin_logistic(1.0, 1.0, 1.0);
    Field u0 = make_constant_field(rig.mesh, {0.5});
    CHECK(lipschitz_probe(u0, u0, 1.0, m, rig.w, base_cfg(1.0, 1e-2)) == 0.0);
  }

  SUBCASE("pure diffusion transports a constant offset at ratio one") {
    ModelSpec m = pure_diffusion(1, {1.0}, StateSpaceX::whole_space(1));
    Field u0 = bump_field(rig.mesh, 1.0, 0.8, 0.2);
    Field v0 = u0;
    v0.values += 0.3;
    const double ratio = lipschitz_probe(u0, v0, 1.0, m, rig.w, base_cfg(1.0, 1e-2));
    CHECK(std::abs(ratio - 1.0) <= 1e-8);
  }

  SUBCASE("logistic trajectories stay within the modest bound") {
    ModelSpec m = builtin_logistic(0.05, 1.0, 1.0);
    Field u0 = make_constant_field(rig.mesh, {0.5});
    Field v0 = make_constant_field(rig.mesh, {0.5001});
    const double ratio = lipschitz_probe(u0, v0, 1.0, m, rig.w, base_cfg(1.0, 1e-2));
    CHECK(ratio > 0.0);
    CHECK(ratio <= 3.0);
  }
}

TEST_CASE("successive step halvings converge at first order") {
  Rig1D rig;
  ModelSpec m = builtin_logistic(0.05, 1.0, 1.0);
  Field u0 = bump_field(rig.mesh, 0.3, 0.2, 0.4);

  std::vector<Eigen::ArrayXXd> finals;
  for (double dt : {0.02, 0.01, 0.005}) {
    RunResult r = run(u0, m, rig.w, base_cfg(1.0, dt));
    REQUIRE(r.exit.kind == ExitKind::CompletedBudget);
    finals.push_back(r.final_state.u.values);
  }
  const double d12 = (finals[0] - finals[1]).abs().maxCoeff();
  const double d23 = (finals[1] - finals[2]).abs().maxCoeff();
  CHECK(d23 < d12);
  CHECK(std::log2(d12 / d23) >= 0.9);
}

TEST_CASE("newton correction refines the split predictor") {
  Rig1D rig;
  ModelSpec m = builtin_porous_media(
      1.0, [](const CellPos&, double u) { return 1.0 - u; });
  Field u0 = bump_field(rig.mesh, 0.4, 0.3, 0.3);

  SolverConfig off = base_cfg(0.5, 0.01);
  SolverConfig on = off;
  on.newton.enabled = true;

  RunResult r_off = run(u0, m, rig.w, off);
  RunResult r_on = run(u0, m, rig.w, on);
  CHECK(r_off.exit.kind == ExitKind::CompletedBudget);
  CHECK(r_on.exit.kind == ExitKind::CompletedBudget);
  CHECK((r_on.final_state.u.values - r_off.final_state.u.values).abs().maxCoeff() <= 0.05);

  // a non-equilibrium step takes at least one correction
  SimulationState s = make_initial_state(u0, m, rig.w, on);
  StepOutcome one = step(s, m, rig.w, on);
  CHECK(!one.collapsed);
  CHECK(one.newton_iters >= 1);

  // the capacity equilibrium needs none and is preserved
  Field eq = make_constant_field(rig.mesh, {1.0});
  SimulationState se = make_initial_state(eq, m, rig.w, on);
  StepOutcome oe = step(se, m, rig.w, on);
  CHECK(!oe.collapsed);
  CHECK(oe.newton_iters == 0);
  RunResult req = run(eq, m, rig.w, on);
  CHECK(req.exit.kind == ExitKind::CompletedBudget);
  CHECK((req.final_state.u.values - 1.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("inadmissible initial data and configs are rejected up front") {
  Rig1D rig;
  ModelSpec m = builtin_logistic(1.0, 1.0, 1.0);
  SolverConfig cfg = base_cfg(1.0, 1e-2);

  Field near = make_constant_field(rig.mesh, {5e-7});  // within delta_x of the wall
  CHECK_THROWS_AS(run(near, m, rig.w, cfg), std::invalid_argument);

  Field outside = make_constant_field(rig.mesh, {-1.0});
  CHECK_THROWS_AS(run(outside, m, rig.w, cfg), std::invalid_argument);

  Field bad = make_constant_field(rig.mesh, {0.5});
  bad.values(0, 0) = std::nan("");
  CHECK_THROWS_AS(run(bad, m, rig.w, cfg), std::invalid_argument);

  Field ok = make_constant_field(rig.mesh, {0.5});
  SolverConfig low_p = cfg;
  low_p.p = 3.0;  // needs strictly more than dimension + 2
  CHECK_THROWS_AS(run(ok, m, rig.w, low_p), std::invalid_argument);
  low_p.p = 3.5;
  CHECK_NOTHROW(run(ok, m, rig.w, low_p));

  SolverConfig bad_dt = cfg;
  bad_dt.dt_min = 1.0;
  CHECK_THROWS_AS(run(ok, m, rig.w, bad_dt), std::invalid_argument);

  SolverConfig bad_newton = cfg;
  bad_newton.newton.enabled = true;
  bad_newton.newton.max_iters = 0;
  CHECK_THROWS_AS(run(ok, m, rig.w, bad_newton), std::invalid_argument);

  SolverConfig bad_delta = cfg;
  bad_delta.delta_x = -1.0;
  CHECK_THROWS_AS(run(ok, m, rig.w, bad_delta), std::invalid_argument);
}

TEST_CASE("reruns are bitwise identical") {
  RigDisk disk;
  ModelSpec two = pure_diffusion(2, {1.0, 0.3}, StateSpaceX::positive_orthant(2));
  Field v0 = make_field(disk.mesh, 2);
  Field b = bump_field(disk.mesh, 0.5, 0.4, 0.3);
  v0.values.col(0) = b.values.col(0);
  v0.values.col(1) = 1.0 - 0.5 * b.values.col(0);

  SolverConfig cfg = base_cfg(0.1, 1e-3);
  RunResult r1 = run(v0, two, disk.w, cfg, 25);
  RunResult r2 = run(v0, two, disk.w, cfg, 25);
  CHECK(r1.exit.kind == r2.exit.kind);
  CHECK(r1.exit.t == r2.exit.t);
  CHECK(r1.times.size() == r2.times.size());
  REQUIRE(r1.trajectory.size() == r2.trajectory.size());
  for (std::size_t k = 0; k < r1.trajectory.size(); ++k)
    CHECK((r1.trajectory[k].values == r2.trajectory[k].values).all());
}
