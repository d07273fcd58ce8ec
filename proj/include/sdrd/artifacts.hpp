#pragma once

// Deterministic run artifacts: a JSON manifest (config echo, per-step log,
// exit payload, file inventory), per-stride snapshot CSVs, the final state,
// the normal-flux depth profile of the final state, and the mesh coordinate
// table. All floating-point text is printed at 17 significant digits, so
// re-running an identical config reproduces every byte.

#include <string>

#include "sdrd/run_config.hpp"

namespace sdrd {

// One row per cell: cell, region, x1, x2, y, u_<j>..., flux_<j>...; collar
// rows carry y and the magnitude of the physical normal flux through the
// cell's boundary-side face (zero for the deepest layer, where that face is
// the insulated truncation face); interior rows leave y and flux empty.
std::string snapshot_to_csv(const Field& u, const ModelSpec& model,
                            const WeightProfile& w);

std::string snapshot_filename(long step);

// Mesh coordinate dump: cell, region, layer, x1, x2, y, volume.
std::string mesh_to_csv(const Mesh& mesh);

// Final-state normal flux per depth and species: species, y, flux.
std::string flux_profile_to_csv(const Field& u, const ModelSpec& model,
                                const WeightProfile& w);

std::string run_manifest_json(const RunConfig& cfg, const RunResult& res,
                              const std::vector<std::string>& files);

// Writes manifest.json, mesh.csv, flux_profile.csv, final.csv and one
// snapshot CSV per on-stride trajectory entry into dir (created if needed).
// With stride 0 only the initial state is written as a snapshot.
void write_run_artifacts(const RunConfig& cfg, const ModelSpec& model,
                         const WeightProfile& w, const RunResult& res,
                         const std::string& dir);

// Minimal manifest recording a failure; class_tag is machine-readable
// ("config" or "runtime").
void write_error_manifest(const std::string& dir, const std::string& class_tag,
                          const std::string& message);

}  // namespace sdrd
