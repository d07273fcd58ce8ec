#include "sdrd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sdrd/format.hpp"

namespace sdrd {

namespace {

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

Field gaussian_1d(const Mesh& mesh, double base, double amp, double center, double width) {
  Field f = make_field(mesh, 1);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double d = (mesh.cells[c].x1 - center) / width;
    f.values(c, 0) = base + amp * std::exp(-d * d);
  }
  return f;
}

// Collar-supported bump, a function of the boundary distance y; interior
// cells sit on the flat base.
Field collar_bump_1d(const Mesh& mesh, double base, double amp, double y0, double width) {
  Field f = make_field(mesh, 1);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Cell& cell = mesh.cells[c];
    if (cell.region == Region::Collar) {
      const double d = (cell.y - y0) / width;
      f.values(c, 0) = base + amp * std::exp(-d * d);
    } else {
      f.values(c, 0) = base;
    }
  }
  return f;
}

ModelSpec constant_diffusion(double a) {
  ModelSpec m;
  m.name = "diffusion";
  m.n_species = 1;
  m.X = StateSpaceX::positive_orthant(1);
  m.a = {[a](const CellPos&, const Eigen::VectorXd&) { return a; }};
  m.g = [](const CellPos&, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Zero(1, 1);
  };
  return m;
}

SolverConfig fixed_dt_cfg(double t_final, double dt) {
  SolverConfig c;
  c.dt_init = dt;
  c.dt_min = std::min(1e-9, dt);
  c.dt_max = dt;
  c.t_final = t_final;
  c.p = 5.0;
  return c;
}

SolverConfig adaptive_cfg(double t_final, double dt_init, double dt_max) {
  SolverConfig c = fixed_dt_cfg(t_final, dt_init);
  c.dt_max = dt_max;
  return c;
}

double mass_of(const Mesh& mesh, const Field& u, int j) {
  return (mesh.volumes().array() * u.values.col(j)).sum();
}

std::string flux_csv(const std::vector<FluxSample>& samples) {
  std::ostringstream os;
  os << "y,flux\n";
  for (const FluxSample& s : samples) os << g17(s.y) << ',' << g17(s.max_abs) << '\n';
  return os.str();
}

void finish(StudyReport& r) { r.pass = study_verdict(r.measurements); }

// ---------------------------------------------------------------------------
// classical Dirichlet comparator, self-contained on purpose: uniform grid,
// second-order Laplacian, u = 0 pinned at both ends, Thomas solve
// ---------------------------------------------------------------------------

struct ClassicalRun {
  std::vector<double> x, u;
  double max_over_time = 0.0;
  double min_over_time = 0.0;
};

ClassicalRun classical_dirichlet_logistic(double length, int n_intervals, double alpha,
                                          double lambda, double u_start, double t_final,
                                          double dt) {
  const int n = n_intervals;
  const double h = length / n;
  const double r = alpha * dt / (h * h);

  ClassicalRun out;
  out.x.resize(n + 1);
  out.u.assign(n + 1, u_start);
  for (int i = 0; i <= n; ++i) out.x[i] = i * h;
  out.u[0] = 0.0;
  out.u[n] = 0.0;
  out.max_over_time = u_start;
  out.min_over_time = 0.0;

  const long steps = std::lround(t_final / dt);
  std::vector<double> rhs(n + 1), diag(n + 1), work(n + 1);
  for (long k = 0; k < steps; ++k) {
    for (int i = 1; i < n; ++i) {
      const double denom = 1.0 - dt * (lambda - out.u[i]);
      rhs[i] = out.u[i] / denom;
    }
    // Thomas sweep on (1 + 2r) u_i - r u_{i-1} - r u_{i+1} = rhs_i
    diag[1] = 1.0 + 2.0 * r;
    work[1] = rhs[1];
    for (int i = 2; i < n; ++i) {
      const double m = -r / diag[i - 1];
      diag[i] = 1.0 + 2.0 * r + m * r;
      work[i] = rhs[i] - m * work[i - 1];
    }
    out.u[n - 1] = work[n - 1] / diag[n - 1];
    for (int i = n - 2; i >= 1; --i)
      out.u[i] = (work[i] + r * out.u[i + 1]) / diag[i];

    for (int i = 0; i <= n; ++i) {
      out.max_over_time = std::max(out.max_over_time, out.u[i]);
      out.min_over_time = std::min(out.min_over_time, out.u[i]);
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// report plumbing
// ---------------------------------------------------------------------------

bool study_verdict(const std::vector<Measurement>& ms) {
  return std::all_of(ms.begin(), ms.end(), [](const Measurement& m) { return m.pass; });
}

Measurement make_measurement(std::string name, double value, double tolerance,
                             std::string relation) {
  Measurement m;
  m.name = std::move(name);
  m.value = value;
  m.tolerance = tolerance;
  m.relation = std::move(relation);
  if (!std::isfinite(value)) {
    m.pass = false;
  } else if (m.relation == "<=") {
    m.pass = value <= tolerance;
  } else if (m.relation == ">=") {
    m.pass = value >= tolerance;
  } else if (m.relation == "<") {
    m.pass = value < tolerance;
  } else if (m.relation == ">") {
    m.pass = value > tolerance;
  } else if (m.relation == "==") {
    m.pass = value == tolerance;
  } else {
    throw std::invalid_argument("unknown measurement relation: " + m.relation);
  }
  return m;
}

double fit_loglog_slope(const std::vector<FluxSample>& samples, double y_max,
                        int drop_deepest) {
  std::vector<FluxSample> kept;
  for (const FluxSample& s : samples)
    if (s.y > 0.0 && s.y <= y_max) kept.push_back(s);
  std::sort(kept.begin(), kept.end(),
            [](const FluxSample& a, const FluxSample& b) { return a.y < b.y; });
  if (drop_deepest > 0 && static_cast<int>(kept.size()) > drop_deepest)
    kept.erase(kept.begin(), kept.begin() + drop_deepest);
  if (kept.size() < 3)
    throw std::invalid_argument("slope fit needs at least three samples in the window");

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const FluxSample& s : kept) {
    if (!(s.max_abs > 0.0))
      throw std::invalid_argument("slope fit requires positive flux magnitudes");
    const double lx = std::log(s.y);
    const double ly = std::log(s.max_abs);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(kept.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string study_report_to_json(const StudyReport& r) {
  nlohmann::json j;
  j["study"] = r.study;
  j["pass"] = r.pass;
  j["parameters"] = nlohmann::json::array();
  for (const auto& [k, v] : r.parameters)
    j["parameters"].push_back({{"name", k}, {"value", v}});
  j["measurements"] = nlohmann::json::array();
  for (const Measurement& m : r.measurements)
    j["measurements"].push_back({{"name", m.name},
                                 {"value", m.value},
                                 {"tolerance", m.tolerance},
                                 {"relation", m.relation},
                                 {"pass", m.pass}});
  j["data_files"] = nlohmann::json::array();
  for (const auto& [name, text] : r.data_files) {
    (void)text;
    j["data_files"].push_back(name);
  }
  return j.dump(2);
}

void write_study_report(const StudyReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream(fs::path(dir) / "report.json") << study_report_to_json(r) << '\n';
  for (const auto& [name, text] : r.data_files)
    std::ofstream(fs::path(dir) / name) << text;
}

// ---------------------------------------------------------------------------
// studies
// ---------------------------------------------------------------------------

StudyReport flux_decay_study(const std::vector<double>& s_values) {
  if (s_values.empty()) throw std::invalid_argument("flux decay study needs exponents");
  std::vector<double> svals = s_values;
  std::sort(svals.begin(), svals.end());
  for (double s : svals)
    if (!(s >= 1.0)) throw std::invalid_argument("flux decay exponents must be at least 1");

  StudyReport r;
  r.study = "flux_decay";
  const double eps = 0.9;
  r.parameters = {{"epsilon", short_num(eps)}, {"t_final", "0.05"}};

  std::vector<double> slopes;
  std::ostringstream slope_csv;
  slope_csv << "s,slope\n";
  for (double s : svals) {
    const DomainSpec dom{DomainKind::Interval, 3.0, eps};
    const WeightProfile w = build_weight_profile(eps, s);
    const Mesh mesh = build_mesh(dom, w, 128, 32, 4.0);
    // Small diffusivity keeps the zero-flux kink at the truncation face inside
    // the two dropped layers over the relaxation horizon.
    const ModelSpec model = builtin_logistic(0.02, 1.0, 1.0);
    // Linear-in-depth collar data carries a uniform stretched gradient, so the
    // measured flux isolates the depth weight.
    Field u0 = make_field(mesh, 1);
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const Cell& cell = mesh.cells[c];
      u0.values(c, 0) = cell.region == Region::Collar
                            ? 0.5 + 0.4 * (w.tau_of_y(cell.y) / mesh.tau_max)
                            : 0.5;
    }

    const RunResult res = run(u0, model, w, adaptive_cfg(0.05, 1e-3, 2.5e-3));
    if (res.exit.kind != ExitKind::CompletedBudget)
      throw std::runtime_error("flux decay relaxation exited early: " +
                               exit_kind_name(res.exit.kind));

    const Field a = eval_coefficients(model, res.final_state.u);
    const std::vector<FluxSample> prof = normal_flux_profile(
        res.final_state.u.values.col(0).matrix(), a.values.col(0).matrix(), w, mesh);
    const double slope = fit_loglog_slope(prof, eps / 3.0, 2);
    slopes.push_back(slope);
    slope_csv << g17(s) << ',' << g17(slope) << '\n';
    r.measurements.push_back(
        make_measurement("slope_s" + short_num(s), slope, s - 0.2, ">="));
    r.data_files.emplace_back("flux_profile_s" + short_num(s) + ".csv", flux_csv(prof));
  }
  if (slopes.size() >= 2) {
    double min_gap = slopes[1] - slopes[0];
    for (std::size_t i = 1; i + 1 < slopes.size(); ++i)
      min_gap = std::min(min_gap, slopes[i + 1] - slopes[i]);
    r.measurements.push_back(make_measurement("slope_increase_min", min_gap, 0.0, ">"));
  }
  r.data_files.emplace_back("slopes.csv", slope_csv.str());

  // Tangential contrast on the disk: the flux along the boundary direction
  // carries no depth weight, so successive collar layers see the same level.
  {
    const DomainSpec dom{DomainKind::Disk, 1.0, 0.3};
    const WeightProfile w = build_weight_profile(0.3, 1.0);
    const Mesh mesh = build_mesh(dom, w, 32, 8, 3.0, 16);
    const ModelSpec model = builtin_logistic(1.0, 1.0, 1.0);
    Field u0 = make_field(mesh, 1);
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const Cell& cell = mesh.cells[c];
      u0.values(c, 0) = 0.5 + 0.2 * std::cos(std::atan2(cell.x2, cell.x1));
    }
    const RunResult res = run(u0, model, w, adaptive_cfg(0.05, 1e-3, 5e-3));
    if (res.exit.kind != ExitKind::CompletedBudget)
      throw std::runtime_error("tangential relaxation exited early: " +
                               exit_kind_name(res.exit.kind));
    const Field a = eval_coefficients(model, res.final_state.u);
    const std::vector<FluxSample> prof = tangential_flux_profile(
        res.final_state.u.values.col(0).matrix(), a.values.col(0).matrix(), mesh);
    double rmin = 1.0, rmax = 1.0;
    for (std::size_t k = 1; k < prof.size(); ++k) {
      const double ratio = prof[k].max_abs / prof[k - 1].max_abs;
      rmin = std::min(rmin, ratio);
      rmax = std::max(rmax, ratio);
    }
    r.measurements.push_back(make_measurement("tangential_ratio_min", rmin, 0.5, ">="));
    r.measurements.push_back(make_measurement("tangential_ratio_max", rmax, 2.0, "<="));
    r.data_files.emplace_back("tangential_profile.csv", flux_csv(prof));
  }

  finish(r);
  return r;
}

StudyReport conservation_study(const std::vector<double>& durations) {
  if (durations.empty()) throw std::invalid_argument("conservation study needs durations");
  for (double T : durations)
    if (!(T > 0.0)) throw std::invalid_argument("durations must be positive");

  StudyReport r;
  r.study = "conservation";
  r.parameters = {{"dt", "0.001"}};
  const double tol = 1e-10;

  std::ostringstream drift_csv;
  drift_csv << "series,duration,dt,drift\n";

  // single species on the interval, quasilinear coefficient, no reaction
  const DomainSpec dom1{DomainKind::Interval, 2.0, 0.5};
  const WeightProfile w1 = build_weight_profile(0.5, 1.0);
  const Mesh mesh1 = build_mesh(dom1, w1, 48, 24, 2.0);
  const ModelSpec porous = builtin_porous_media(
      1.0, [](const CellPos&, double) { return 0.0; });
  const Field b1 = gaussian_1d(mesh1, 0.5, 0.4, 1.0, 0.2);

  bool mass_saved = false;
  for (double T : durations) {
    const int stride = std::max(1, static_cast<int>(std::lround(T / 1e-3)) / 64);
    const RunResult res = run(b1, porous, w1, fixed_dt_cfg(T, 1e-3), stride);
    const double m0 = mass_of(mesh1, b1, 0);
    const double drift =
        std::abs(mass_of(mesh1, res.final_state.u, 0) - m0) / std::abs(m0);
    r.measurements.push_back(
        make_measurement("drift_1d_T" + short_num(T), drift, tol, "<="));
    drift_csv << "interval_bump," << g17(T) << ",0.001," << g17(drift) << '\n';
    if (!mass_saved) {
      std::ostringstream hist;
      hist << "t,mass\n";
      for (std::size_t k = 0; k < res.times.size(); ++k)
        hist << g17(res.times[k]) << ',' << g17(mass_of(mesh1, res.trajectory[k], 0))
             << '\n';
      r.data_files.emplace_back("mass_history_1d.csv", hist.str());
      mass_saved = true;
    }
  }

  // two species on the disk with coupled coefficients, no reaction
  const DomainSpec dom2{DomainKind::Disk, 1.0, 0.3};
  const WeightProfile w2 = build_weight_profile(0.3, 1.0);
  const Mesh mesh2 = build_mesh(dom2, w2, 16, 6, 2.0, 12);
  ModelSpec coupled;
  coupled.name = "coupled_diffusion";
  coupled.n_species = 2;
  coupled.X = StateSpaceX::positive_orthant(2);
  coupled.a = {
      [](const CellPos&, const Eigen::VectorXd& u) { return 0.2 + u[0] * u[1]; },
      [](const CellPos&, const Eigen::VectorXd& u) { return 0.1 + u[0]; }};
  coupled.g = [](const CellPos&, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Zero(2, 2);
  };
  Field b2 = make_field(mesh2, 2);
  for (int c = 0; c < mesh2.n_cells(); ++c) {
    const Cell& cell = mesh2.cells[c];
    const double d2 = cell.x1 * cell.x1 + cell.x2 * cell.x2;
    b2.values(c, 0) = 0.5 + 0.4 * std::exp(-d2 / 0.09);
    b2.values(c, 1) = 1.0 - 0.3 * std::exp(-d2 / 0.09);
  }
  for (double T : durations) {
    const RunResult res = run(b2, coupled, w2, fixed_dt_cfg(T, 1e-3));
    for (int j = 0; j < 2; ++j) {
      const double m0 = mass_of(mesh2, b2, j);
      const double drift =
          std::abs(mass_of(mesh2, res.final_state.u, j) - m0) / std::abs(m0);
      r.measurements.push_back(make_measurement(
          "drift_2d_sp" + std::to_string(j) + "_T" + short_num(T), drift, tol, "<="));
      drift_csv << "disk_two_species_sp" << j << ',' << g17(T) << ",0.001,"
                << g17(drift) << '\n';
    }
  }

  // drift does not depend on the step size
  for (double dt : {1e-2, 1e-3}) {
    const RunResult res = run(b1, porous, w1, fixed_dt_cfg(0.5, dt));
    const double m0 = mass_of(mesh1, b1, 0);
    const double drift =
        std::abs(mass_of(mesh1, res.final_state.u, 0) - m0) / std::abs(m0);
    r.measurements.push_back(
        make_measurement("drift_dt_" + short_num(dt), drift, tol, "<="));
    drift_csv << "interval_bump_dt," << "0.5," << g17(dt) << ',' << g17(drift) << '\n';
  }

  r.data_files.emplace_back("mass_drift.csv", drift_csv.str());
  finish(r);
  return r;
}

StudyReport classical_comparison_study(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");

  StudyReport r;
  r.study = "classical_comparison";
  const double alpha = 0.02;
  const double t_final = 20.0;
  r.parameters = {{"lambda", short_num(lambda)},
                  {"alpha", short_num(alpha)},
                  {"t_final", short_num(t_final)}};

  // classical side: Dirichlet walls pin the population to zero on the boundary
  const double dt_cl = std::min(1e-2, 0.5 / lambda);
  const ClassicalRun cl =
      classical_dirichlet_logistic(2.0, 200, alpha, lambda, lambda / 2.0, t_final, dt_cl);
  r.measurements.push_back(make_measurement(
      "classical_max_overshoot", cl.max_over_time - lambda, 1e-8, "<="));
  r.measurements.push_back(
      make_measurement("classical_min_undershoot", cl.min_over_time, -1e-8, ">="));
  r.measurements.push_back(make_measurement(
      "classical_boundary_value", std::max(std::abs(cl.u.front()), std::abs(cl.u.back())),
      1e-15, "<="));
  r.measurements.push_back(make_measurement(
      "classical_near_boundary", std::max(cl.u[1], cl.u[cl.u.size() - 2]),
      0.25 * lambda, "<="));

  std::ostringstream cl_csv;
  cl_csv << "x,u\n";
  for (std::size_t i = 0; i < cl.x.size(); ++i)
    cl_csv << g17(cl.x[i]) << ',' << g17(cl.u[i]) << '\n';
  r.data_files.emplace_back("classical_profile.csv", cl_csv.str());

  // degenerate side: no boundary condition, the whole habitat fills up
  const DomainSpec dom{DomainKind::Interval, 2.0, 0.5};
  const WeightProfile w = build_weight_profile(0.5, 1.0);
  const Mesh mesh = build_mesh(dom, w, 48, 24, 3.0);
  const ModelSpec model = builtin_logistic(alpha, lambda, 1.0);
  const Field u0 = make_constant_field(mesh, {lambda / 2.0});
  const RunResult res = run(u0, model, w, adaptive_cfg(t_final, 1e-3, 0.05));
  if (res.exit.kind != ExitKind::CompletedBudget)
    throw std::runtime_error("degenerate comparison run exited early: " +
                             exit_kind_name(res.exit.kind));

  const double interior =
      res.final_state.u.values(mesh.interior_cell(mesh.n_interior / 2), 0);
  const double deepest =
      res.final_state.u.values(mesh.collar_cell(0, mesh.n_collar - 1, 0), 0);
  r.measurements.push_back(make_measurement(
      "degenerate_interior_gap", std::abs(interior - lambda), 1e-2, "<="));
  r.measurements.push_back(make_measurement(
      "degenerate_boundary_layer_value", deepest, 0.5 * lambda, ">="));
  r.measurements.push_back(make_measurement(
      "degenerate_boundary_vs_interior", std::abs(deepest - interior) / interior, 0.1,
      "<="));

  std::vector<std::pair<double, double>> prof;
  for (int c = 0; c < mesh.n_cells(); ++c)
    prof.emplace_back(mesh.cells[c].x1, res.final_state.u.values(c, 0));
  std::sort(prof.begin(), prof.end());
  std::ostringstream dg_csv;
  dg_csv << "x,u\n";
  for (const auto& [x, u] : prof) dg_csv << g17(x) << ',' << g17(u) << '\n';
  r.data_files.emplace_back("degenerate_profile.csv", dg_csv.str());

  finish(r);
  return r;
}

StudyReport truncation_study(const std::vector<double>& tau_values,
                             double tau_reference) {
  if (tau_values.size() < 3)
    throw std::invalid_argument("truncation study needs at least three depths");
  for (std::size_t i = 0; i + 1 < tau_values.size(); ++i)
    if (!(tau_values[i] < tau_values[i + 1]))
      throw std::invalid_argument("truncation depths must increase");
  if (!(tau_values.front() > 0.0))
    throw std::invalid_argument("truncation depths must be positive");
  const double ratio0 = tau_values[1] / tau_values[0];
  for (std::size_t i = 1; i + 1 < tau_values.size(); ++i)
    if (std::abs(tau_values[i + 1] / tau_values[i] - ratio0) > 1e-9 * ratio0)
      throw std::invalid_argument("truncation depths must be geometrically spaced");
  if (!(tau_reference > tau_values.back()))
    throw std::invalid_argument("reference depth must exceed the studied depths");

  StudyReport r;
  r.study = "truncation";
  r.parameters = {{"tau_reference", short_num(tau_reference)}, {"t_final", "2"}};

  const DomainSpec dom{DomainKind::Interval, 2.0, 0.5};
  const WeightProfile w = build_weight_profile(0.5, 1.0);
  const ModelSpec model = constant_diffusion(1.0);
  const int n_interior = 16;
  const double dtau = 1.0 / 16.0;

  // same physical initial data on every mesh; compare interior cells only
  auto interior_final = [&](double tau_max, bool collar_series) {
    const int n_collar = static_cast<int>(std::lround(tau_max / dtau));
    const Mesh mesh = build_mesh(dom, w, n_collar, n_interior, tau_max);
    const Field u0 = collar_series
                         ? collar_bump_1d(mesh, 0.05, 0.8, 0.12, 0.04)
                         : gaussian_1d(mesh, 0.05, 0.8, 1.0, 0.25);
    // long enough that influence from the deepest studied face clears
    // round-off, so the depth sequence stays strictly monotone
    const RunResult res = run(u0, model, w, fixed_dt_cfg(2.0, 1e-2));
    if (res.exit.kind != ExitKind::CompletedBudget)
      throw std::runtime_error("truncation run exited early: " +
                               exit_kind_name(res.exit.kind));
    Eigen::VectorXd vals(n_interior);
    for (int i = 0; i < n_interior; ++i)
      vals[i] = res.final_state.u.values(mesh.interior_cell(i), 0);
    return vals;
  };

  std::vector<std::vector<double>> series_diffs(2);
  for (int series = 0; series < 2; ++series) {
    const bool collar = series == 1;
    const char* tag = collar ? "collar" : "interior";
    const Eigen::VectorXd ref = interior_final(tau_reference, collar);
    std::vector<double>& diffs = series_diffs[series];
    std::ostringstream csv;
    csv << "tau_max,interior_diff\n";
    for (double tau : tau_values) {
      const double d = (interior_final(tau, collar) - ref).cwiseAbs().maxCoeff();
      diffs.push_back(d);
      csv << g17(tau) << ',' << g17(d) << '\n';
    }
    double min_drop = diffs[0] - diffs[1];
    for (std::size_t i = 1; i + 1 < diffs.size(); ++i)
      min_drop = std::min(min_drop, diffs[i] - diffs[i + 1]);
    r.measurements.push_back(make_measurement(
        std::string(tag) + "_monotone_drop_min", min_drop, 0.0, ">"));
    r.measurements.push_back(make_measurement(
        std::string(tag) + "_smallest_diff", diffs.back(), collar ? 1e-4 : 1e-6, "<="));
    r.data_files.emplace_back(std::string("truncation_") + tag + ".csv", csv.str());
  }
  // deep-collar data feels the truncation more than an interior bump does
  r.measurements.push_back(make_measurement(
      "collar_sensitivity_excess", series_diffs[1][0] - series_diffs[0][0], 0.0, ">"));

  finish(r);
  return r;
}

StudyReport exit_alternative_study() {
  StudyReport r;
  r.study = "exit_alternatives";

  const DomainSpec dom{DomainKind::Interval, 2.0, 0.5};
  const WeightProfile w = build_weight_profile(0.5, 1.0);
  const Mesh mesh = build_mesh(dom, w, 32, 16, 2.0);

  std::ostringstream csv;
  csv << "case,exit,t,detail\n";

  // growth to capacity inside the budget
  {
    const ModelSpec model = builtin_logistic(1.0, 1.0, 1.0);
    const Field u0 = make_constant_field(mesh, {0.5});
    const RunResult res = run(u0, model, w, adaptive_cfg(2.0, 1e-3, 0.02));
    r.measurements.push_back(make_measurement(
        "budget_exit_match",
        res.exit.kind == ExitKind::CompletedBudget ? 1.0 : 0.0, 1.0, "=="));
    r.measurements.push_back(make_measurement("budget_exit_time", res.exit.t, 2.0, "=="));
    csv << "budget," << exit_kind_name(res.exit.kind) << ',' << g17(res.exit.t) << ",\n";
  }

  // decay toward the positivity wall; crossing time is the ODE closed form
  {
    const ModelSpec model = builtin_logistic(1.0, -0.5, 0.0);
    const Field u0 = make_constant_field(mesh, {0.1});
    SolverConfig cfg = adaptive_cfg(30.0, 1e-3, 0.02);
    cfg.delta_x = 1e-3;
    const RunResult res = run(u0, model, w, cfg);
    const double predicted = std::log(0.1 / cfg.delta_x) / 0.5;
    r.measurements.push_back(make_measurement(
        "decay_exit_match",
        res.exit.kind == ExitKind::StateBoundaryApproach ? 1.0 : 0.0, 1.0, "=="));
    r.measurements.push_back(make_measurement(
        "decay_exit_time_rel_err", std::abs(res.exit.t - predicted) / predicted, 0.1,
        "<="));
    csv << "state_boundary," << exit_kind_name(res.exit.kind) << ',' << g17(res.exit.t)
        << ",\n";
  }

  // strong linear growth blowing through a small norm ceiling
  {
    const ModelSpec model = builtin_porous_media(
        1.0, [](const CellPos&, double) { return 5.0; });
    const Field u0 = make_constant_field(mesh, {1.0});
    SolverConfig cfg = adaptive_cfg(10.0, 1e-3, 0.02);
    cfg.norm_max = 1e4;
    const double n0 = make_initial_state(u0, model, w, cfg).last_norm;
    const RunResult res = run(u0, model, w, cfg);
    const double predicted = std::log(cfg.norm_max / n0) / 5.0;
    r.measurements.push_back(make_measurement(
        "divergence_exit_match",
        res.exit.kind == ExitKind::NormDivergence ? 1.0 : 0.0, 1.0, "=="));
    r.measurements.push_back(
        make_measurement("divergence_exit_norm", res.exit.norm, cfg.norm_max, ">"));
    r.measurements.push_back(make_measurement(
        "divergence_exit_time_rel_err", std::abs(res.exit.t - predicted) / predicted,
        0.2, "<="));
    csv << "norm_divergence," << exit_kind_name(res.exit.kind) << ',' << g17(res.exit.t)
        << ',' << res.exit.detail << '\n';
  }

  r.data_files.emplace_back("exits.csv", csv.str());
  finish(r);
  return r;
}

}  // namespace sdrd
