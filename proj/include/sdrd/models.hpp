#pragma once

// Quasilinear model systems: per-species diffusion coefficients a_i(x, u) and
// the reaction structure f(u) = g(x, u) u, together with the open state box X
// the solution must stay inside. Ships the three built-in families; custom
// models are a code-level extension point (evaluators must be pure).

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdrd/fields.hpp"

namespace sdrd {

struct CellPos {
  double x1 = 0.0;
  double x2 = 0.0;
};

using SpatialFn = std::function<double(const CellPos&)>;
// a_i(x, u): strictly positive on X by model contract.
using CoefficientFn = std::function<double(const CellPos&, const Eigen::VectorXd&)>;
// g(x, u): n x n reaction matrix, f(u) = g(x, u) u.
using ReactionFn = std::function<Eigen::MatrixXd(const CellPos&, const Eigen::VectorXd&)>;

struct ModelSpec {
  std::string name = "custom";
  int n_species = 1;
  StateSpaceX X;
  std::vector<CoefficientFn> a;
  ReactionFn g;
  // One exponent per species, all >= 1; empty means every species diffuses with
  // the mesh's base exponent.
  std::vector<double> per_species_s;
};

void validate_model(const ModelSpec& m);  // throws std::invalid_argument

// Per-cell, per-species coefficient values. Throws std::domain_error when a
// cell state leaves X or a coefficient comes out nonpositive/non-finite.
Field eval_coefficients(const ModelSpec& m, const Field& u);

// Per-cell f = g(x, u) u. Throws std::domain_error when a state leaves X.
Field eval_reaction(const ModelSpec& m, const Field& u);

// g at one cell, with the same state checks; used by the implicit reaction step.
Eigen::MatrixXd reaction_matrix(const ModelSpec& m, const CellPos& x,
                                const Eigen::VectorXd& u);

SpatialFn constant_fn(double value);

// d/dt u - div_s(alpha grad_s u) = (lambda - a u) u on X = (0, inf).
ModelSpec builtin_logistic(double alpha, double lambda, double a);

// d/dt u - div_s(u^alpha grad_s u) = g(x, u) u on X = (0, inf); alpha != 0
// (alpha = 0 is the constant-coefficient case, use builtin_logistic).
ModelSpec builtin_porous_media(double alpha,
                               std::function<double(const CellPos&, double)> g);

// Two interacting populations on X = (0, inf)^2:
//   d/dt u - div_s((a + u^alpha v^beta) grad_s u) = (a0 + a1 u + a2 v) u
//   d/dt v - div_s((b + u^gamma v^delta) grad_s v) = (b0 + b1 v + b2 u) v
// Signs of a1, a2, b1, b2 select competition, predation or cooperation.
struct TwoPopulationParams {
  SpatialFn a, b;        // nonnegative where sampled
  SpatialFn a0, a1, a2;
  SpatialFn b0, b1, b2;
  double alpha = 1.0, beta = 1.0, gamma = 1.0, delta = 1.0;
};

ModelSpec builtin_two_population(const TwoPopulationParams& p);

}  // namespace sdrd
