#pragma once

// Cell fields over a mesh, weighted norms and the state-space box.
//
// Norm conventions (discrete versions of the collar-weighted scale):
//  * lp: global p-norm with cylinder-metric volumes on the collar.
//  * w1p/w2p: collar part and interior part combined additively; each part is a
//    sum over derivative orders i of (sum |i-th difference|^p vol)^{1/p}. Normal
//    collar derivatives are difference quotients in tau (these equal the weighted
//    derivative r^s d/dy), tangential derivatives use the frozen boundary metric.
//  * bc0: max over cells; bc1s adds the max face difference quotient, which on
//    collar-normal faces is again the weighted normal derivative.
// First differences are forward (backward at the last cell of a ray); second
// differences are centred (shifted three-point stencils at ray ends).

#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdrd/geometry.hpp"

namespace sdrd {

struct Field {
  const Mesh* mesh = nullptr;
  Eigen::ArrayXXd values;  // n_cells x n_species

  int n_species() const { return static_cast<int>(values.cols()); }
  bool is_valid() const { return mesh != nullptr && values.allFinite(); }
};

Field make_field(const Mesh& mesh, int n_species);
Field make_constant_field(const Mesh& mesh, const std::vector<double>& per_species);

// Open box X = prod (lower_i, upper_i); bounds may be +-infinity.
struct StateSpaceX {
  std::vector<double> lower, upper;

  int size() const { return static_cast<int>(lower.size()); }
  static StateSpaceX positive_orthant(int n);
  static StateSpaceX whole_space(int n);
};

void validate_state_space(const StateSpaceX& X, int n_species);

// Signed distance of the field's range to the box boundary: min over cells and
// species of the margin to every finite bound. +infinity for X = R^n, negative
// when a value lies outside the closed box.
double dist_to_state_boundary(const Field& u, const StateSpaceX& X);
bool in_state_space(const Field& u, const StateSpaceX& X);

double weighted_lp_norm(const Field& u, double p, const WeightProfile& w);
double weighted_sobolev_norm(const Field& u, int k, double p, const WeightProfile& w);
double bc_norm(const Field& u, int k, const WeightProfile& w);

// max of the two discrete mixed norms L_p(J, W_p^2) and W_p^1(J, L_p) for a
// trajectory sampled at uniform spacing dt (first sample at t = 0).
double trajectory_norm(const std::vector<Field>& traj, double p, double dt,
                       const WeightProfile& w);

// Share of the deepest collar layer in the lp mass; > 0.1 flags a norm whose
// truncated tail is not negligible.
double deepest_layer_fraction(const Field& u, double p, const WeightProfile& w);

struct NormReport {
  double lp = 0.0;
  double w1p = 0.0;
  double w2p = 0.0;
  double bc0 = 0.0;
  double bc1s = 0.0;
  double p = 0.0;
  double s = 0.0;
};

NormReport norm_report(const Field& u, double p, const WeightProfile& w);
std::string norm_report_to_json(const NormReport& r);

// CSV with one row per cell: cell, region, x1, x2, y, then one column per species.
std::string field_to_csv(const Field& u, const std::vector<std::string>& species_names);
// Reads the species columns back from field_to_csv output (or any CSV whose
// header contains the requested species names); row count must match the mesh.
Field field_from_csv(const Mesh& mesh, const std::string& csv,
                     const std::vector<std::string>& species_names);

}  // namespace sdrd
