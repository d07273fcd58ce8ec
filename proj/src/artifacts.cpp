#include "sdrd/artifacts.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sdrd/format.hpp"
#include "sdrd/operators.hpp"

namespace sdrd {

namespace {

std::vector<WeightProfile> species_profiles(const ModelSpec& model,
                                            const WeightProfile& w) {
  std::vector<WeightProfile> out;
  const std::size_t n = static_cast<std::size_t>(model.n_species);
  if (model.per_species_s.empty()) {
    out.assign(n, w);
    return out;
  }
  for (double si : model.per_species_s)
    out.push_back(si == w.s() ? w : build_weight_profile(w.epsilon(), si));
  return out;
}

// |physical normal flux| through each collar cell's boundary-side face; the
// deepest layer's face is the insulated truncation face, so it stays zero.
Eigen::VectorXd cell_flux(const Eigen::VectorXd& u, const Eigen::VectorXd& a_cells,
                          const WeightProfile& w, const Mesh& mesh) {
  const FaceValues flux = degenerate_flux(u, a_cells, w, mesh);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mesh.n_cells());
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const Face& f = mesh.faces[i];
    if (f.kind != FaceKind::CollarNormal) continue;
    const int shallow =
        mesh.cells[f.a].layer < mesh.cells[f.b].layer ? f.a : f.b;
    out[shallow] = std::abs(flux.v[static_cast<Eigen::Index>(i)]);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::string snapshot_to_csv(const Field& u, const ModelSpec& model,
                            const WeightProfile& w) {
  if (!u.is_valid()) throw std::invalid_argument("field is not valid");
  const Mesh& mesh = *u.mesh;
  const int n = u.n_species();
  const Field a = eval_coefficients(model, u);
  const std::vector<WeightProfile> profs = species_profiles(model, w);

  Eigen::MatrixXd flux(mesh.n_cells(), n);
  for (int j = 0; j < n; ++j)
    flux.col(j) = cell_flux(u.values.col(j).matrix(), a.values.col(j).matrix(),
                            profs[static_cast<std::size_t>(j)], mesh);

  std::ostringstream os;
  os << "cell,region,x1,x2,y";
  for (int j = 0; j < n; ++j) os << ",u_" << j;
  for (int j = 0; j < n; ++j) os << ",flux_" << j;
  os << '\n';
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Cell& cell = mesh.cells[c];
    const bool collar = cell.region == Region::Collar;
    os << c << ',' << (collar ? 'S' : 'U') << ',' << g17(cell.x1) << ','
       << g17(cell.x2) << ',' << (collar ? g17(cell.y) : std::string());
    for (int j = 0; j < n; ++j) os << ',' << g17(u.values(c, j));
    for (int j = 0; j < n; ++j)
      os << ',' << (collar ? g17(flux(c, j)) : std::string());
    os << '\n';
  }
  return os.str();
}

std::string snapshot_filename(long step) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "snapshot_%06ld.csv", step);
  return buf;
}

std::string mesh_to_csv(const Mesh& mesh) {
  std::ostringstream os;
  os << "cell,region,layer,x1,x2,y,volume\n";
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Cell& cell = mesh.cells[c];
    const bool collar = cell.region == Region::Collar;
    os << c << ',' << (collar ? 'S' : 'U') << ',' << (collar ? std::to_string(cell.layer) : std::string())
       << ',' << g17(cell.x1) << ',' << g17(cell.x2) << ','
       << (collar ? g17(cell.y) : std::string()) << ',' << g17(cell.volume) << '\n';
  }
  return os.str();
}

std::string flux_profile_to_csv(const Field& u, const ModelSpec& model,
                                const WeightProfile& w) {
  if (!u.is_valid()) throw std::invalid_argument("field is not valid");
  const Mesh& mesh = *u.mesh;
  const Field a = eval_coefficients(model, u);
  const std::vector<WeightProfile> profs = species_profiles(model, w);
  std::ostringstream os;
  os << "species,y,flux\n";
  for (int j = 0; j < u.n_species(); ++j) {
    const std::vector<FluxSample> prof = normal_flux_profile(
        u.values.col(j).matrix(), a.values.col(j).matrix(),
        profs[static_cast<std::size_t>(j)], mesh);
    for (const FluxSample& s : prof)
      os << j << ',' << g17(s.y) << ',' << g17(s.max_abs) << '\n';
  }
  return os.str();
}

std::string run_manifest_json(const RunConfig& cfg, const RunResult& res,
                              const std::vector<std::string>& files) {
  const Mesh& mesh = *res.final_state.u.mesh;
  nlohmann::json j;
  j["config"] = serialize_config(cfg);
  j["geometry"] = {{"dimension", cfg.domain.dimension()},
                   {"n_cells", mesh.n_cells()},
                   {"n_collar", mesh.n_collar},
                   {"n_interior", mesh.n_interior}};
  j["exit"] = {{"kind", exit_kind_name(res.exit.kind)},
               {"t", res.exit.t},
               {"min_dist", res.exit.min_dist},
               {"norm", res.exit.norm},
               {"dt", res.exit.dt},
               {"detail", res.exit.detail}};
  j["steps"] = nlohmann::json::array();
  for (const StepLogEntry& e : res.log)
    j["steps"].push_back({{"step", e.step},
                          {"t", e.t},
                          {"dt", e.dt},
                          {"norm", e.norm},
                          {"min_dist", e.min_dist},
                          {"rejections", e.rejections}});
  j["snapshots"] = nlohmann::json::array();
  const int stride = cfg.output.snapshot_stride;
  const long steps = static_cast<long>(res.log.size());
  const long n_onstride = stride > 0 ? steps / stride + 1 : 1;
  for (long i = 0; i < n_onstride; ++i) {
    const long step = i * (stride > 0 ? stride : 1);
    j["snapshots"].push_back({{"file", snapshot_filename(step)},
                              {"step", step},
                              {"t", res.times[static_cast<std::size_t>(i)]}});
  }
  j["snapshots"].push_back(
      {{"file", "final.csv"}, {"step", steps}, {"t", res.final_state.t}});
  j["files"] = files;
  return j.dump(2);
}

void write_run_artifacts(const RunConfig& cfg, const ModelSpec& model,
                         const WeightProfile& w, const RunResult& res,
                         const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const Mesh& mesh = *res.final_state.u.mesh;

  std::vector<std::string> files = {"mesh.csv", "flux_profile.csv", "final.csv"};
  const int stride = cfg.output.snapshot_stride;
  const long steps = static_cast<long>(res.log.size());
  const long n_onstride = stride > 0 ? steps / stride + 1 : 1;
  for (long i = 0; i < n_onstride; ++i) {
    const long step = i * (stride > 0 ? stride : 1);
    files.push_back(snapshot_filename(step));
    write_text(fs::path(dir) / snapshot_filename(step),
               snapshot_to_csv(res.trajectory[static_cast<std::size_t>(i)], model, w));
  }
  write_text(fs::path(dir) / "mesh.csv", mesh_to_csv(mesh));
  write_text(fs::path(dir) / "final.csv",
             snapshot_to_csv(res.final_state.u, model, w));
  write_text(fs::path(dir) / "flux_profile.csv",
             flux_profile_to_csv(res.final_state.u, model, w));
  write_text(fs::path(dir) / "manifest.json",
             run_manifest_json(cfg, res, files) + "\n");
}

void write_error_manifest(const std::string& dir, const std::string& class_tag,
                          const std::string& message) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json j;
  j["error"] = {{"class", class_tag}, {"message", message}};
  write_text(fs::path(dir) / "manifest.json", j.dump(2) + "\n");
}

}  // namespace sdrd
