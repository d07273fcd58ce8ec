// Command line driver. Verbs:
//   run <config>                 integrate and write run artifacts
//   study <name> <config>       execute a named study, write its report
//   validate <config>            parse and dry-build, report every violation
//   norms <snapshot.csv> <config>  norm report of a stored snapshot
//
// Exit codes: 0 success (completed budget / study pass / valid config);
// 2 configuration or usage error; 3 runtime failure; 10 state-boundary
// approach; 11 norm divergence; 12 step collapse; 20 study verdict failed.
// SDRD_OUTPUT_DIR overrides the configured output directory.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sdrd/artifacts.hpp"
#include "sdrd/experiments.hpp"
#include "sdrd/run_config.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitStateBoundary = 10;
constexpr int kExitNormDivergence = 11;
constexpr int kExitStepCollapse = 12;
constexpr int kExitStudyFail = 20;

int usage() {
  std::cerr << "usage:\n"
            << "  sdrd run <config>\n"
            << "  sdrd study <name> <config>    names: flux_decay, conservation,\n"
            << "      classical_comparison, truncation, exit_alternatives\n"
            << "  sdrd validate <config>\n"
            << "  sdrd norms <snapshot.csv> <config>\n";
  return kExitConfig;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Output directory with the environment override applied.
std::string effective_dir(const std::string& configured) {
  const char* env = std::getenv("SDRD_OUTPUT_DIR");
  return env != nullptr && *env != '\0' ? std::string(env) : configured;
}

sdrd::RunConfig load_config(const std::string& path) {
  sdrd::RunConfig cfg = sdrd::parse_config(slurp(path));
  cfg.output.directory = effective_dir(cfg.output.directory);
  return cfg;
}

int exit_code_for(sdrd::ExitKind kind) {
  switch (kind) {
    case sdrd::ExitKind::CompletedBudget: return kExitOk;
    case sdrd::ExitKind::StateBoundaryApproach: return kExitStateBoundary;
    case sdrd::ExitKind::NormDivergence: return kExitNormDivergence;
    case sdrd::ExitKind::StepCollapse: return kExitStepCollapse;
  }
  return kExitRuntime;
}

int cmd_run(const std::string& config_path) {
  sdrd::RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    const char* env = std::getenv("SDRD_OUTPUT_DIR");
    if (env != nullptr && *env != '\0')
      sdrd::write_error_manifest(env, "config", e.what());
    return kExitConfig;
  }
  const std::string dir = cfg.output.directory;
  try {
    const sdrd::WeightProfile w = sdrd::make_weight(cfg);
    const sdrd::Mesh mesh = sdrd::make_run_mesh(cfg);
    const sdrd::ModelSpec model = sdrd::make_model(cfg);
    const sdrd::Field u0 = sdrd::make_initial_field(cfg, mesh);
    const sdrd::RunResult res =
        sdrd::run(u0, model, w, cfg.solver, cfg.output.snapshot_stride);
    sdrd::write_run_artifacts(cfg, model, w, res, dir);
    std::cout << "exit: " << sdrd::exit_kind_name(res.exit.kind)
              << " t=" << res.exit.t << " steps=" << res.log.size()
              << " artifacts=" << dir << '\n';
    return exit_code_for(res.exit.kind);
  } catch (const std::invalid_argument& e) {
    sdrd::write_error_manifest(dir, "config", e.what());
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    sdrd::write_error_manifest(dir, "runtime", e.what());
    std::cerr << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_study(const std::string& name, const std::string& config_path) {
  sdrd::RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  }
  const std::string dir =
      (std::filesystem::path(cfg.output.directory) / name).string();
  try {
    sdrd::StudyReport report;
    if (name == "flux_decay") {
      report = sdrd::flux_decay_study({1.0, 1.5, 2.0});
    } else if (name == "conservation") {
      report = sdrd::conservation_study({0.5, 1.0});
    } else if (name == "classical_comparison") {
      report = sdrd::classical_comparison_study(1.0);
    } else if (name == "truncation") {
      report = sdrd::truncation_study({2.0, 4.0, 8.0}, 16.0);
    } else if (name == "exit_alternatives") {
      report = sdrd::exit_alternative_study();
    } else {
      std::cerr << "unknown study: " << name << '\n';
      return usage();
    }
    sdrd::write_study_report(report, dir);
    for (const sdrd::Measurement& m : report.measurements)
      std::cout << (m.pass ? "  ok   " : "  FAIL ") << m.name << " = " << m.value
                << " (" << m.relation << ' ' << m.tolerance << ")\n";
    std::cout << "study " << name << ": " << (report.pass ? "PASS" : "FAIL")
              << " report=" << dir << '\n';
    return report.pass ? kExitOk : kExitStudyFail;
  } catch (const std::exception& e) {
    sdrd::write_error_manifest(dir, "runtime", e.what());
    std::cerr << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_validate(const std::string& config_path) {
  try {
    const sdrd::RunConfig cfg = sdrd::parse_config(slurp(config_path));
    // dry-build: geometry and model consistency checks beyond key ranges
    const sdrd::Mesh mesh = sdrd::make_run_mesh(cfg);
    const sdrd::ModelSpec model = sdrd::make_model(cfg);
    (void)sdrd::make_initial_field(cfg, mesh);
    (void)model;
    std::cout << "ok\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  }
}

int cmd_norms(const std::string& snapshot_path, const std::string& config_path) {
  sdrd::RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const sdrd::Mesh mesh = sdrd::make_run_mesh(cfg);
    const sdrd::WeightProfile w = sdrd::make_weight(cfg);
    std::vector<std::string> names;
    for (int j = 0; j < sdrd::config_species_count(cfg.model); ++j)
      names.push_back("u_" + std::to_string(j));
    const sdrd::Field u = sdrd::field_from_csv(mesh, slurp(snapshot_path), names);
    std::cout << sdrd::norm_report_to_json(sdrd::norm_report(u, cfg.solver.p, w))
              << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  if (args.size() == 2 && args[0] == "run") return cmd_run(args[1]);
  if (args.size() == 3 && args[0] == "study") return cmd_study(args[1], args[2]);
  if (args.size() == 2 && args[0] == "validate") return cmd_validate(args[1]);
  if (args.size() == 3 && args[0] == "norms") return cmd_norms(args[1], args[2]);
  return usage();
}
