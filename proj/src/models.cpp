#include "sdrd/models.hpp"

#include <cmath>
#include <stdexcept>

namespace sdrd {

namespace {

void check_state_row(const StateSpaceX& X, const Eigen::VectorXd& u) {
  for (int j = 0; j < u.size(); ++j)
    if (!(u[j] > X.lower[j]) || !(u[j] < X.upper[j]))
      throw std::domain_error("state left the admissible set X");
}

CellPos cell_pos(const Cell& c) { return CellPos{c.x1, c.x2}; }

}  // namespace

void validate_model(const ModelSpec& m) {
  if (m.n_species < 1) throw std::invalid_argument("model needs at least one species");
  if (static_cast<int>(m.a.size()) != m.n_species)
    throw std::invalid_argument("model needs one coefficient evaluator per species");
  for (const auto& fn : m.a)
    if (!fn) throw std::invalid_argument("coefficient evaluator is empty");
  if (!m.g) throw std::invalid_argument("reaction evaluator is empty");
  validate_state_space(m.X, m.n_species);
  if (!m.per_species_s.empty()) {
    if (static_cast<int>(m.per_species_s.size()) != m.n_species)
      throw std::invalid_argument("per-species exponent list length must equal n_species");
    for (double s : m.per_species_s)
      if (!(s >= 1.0) || !std::isfinite(s))
        throw std::invalid_argument("per-species exponents must be finite and >= 1");
  }
}

Field eval_coefficients(const ModelSpec& m, const Field& u) {
  if (u.n_species() != m.n_species)
    throw std::invalid_argument("field species count does not match the model");
  Field out = make_field(*u.mesh, m.n_species);
  Eigen::VectorXd row(m.n_species);
  for (int c = 0; c < u.mesh->n_cells(); ++c) {
    row = u.values.row(c).transpose();
    check_state_row(m.X, row);
    const CellPos x = cell_pos(u.mesh->cells[c]);
    for (int j = 0; j < m.n_species; ++j) {
      const double v = m.a[static_cast<std::size_t>(j)](x, row);
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::domain_error("model coefficient is not positive and finite");
      out.values(c, j) = v;
    }
  }
  return out;
}

Field eval_reaction(const ModelSpec& m, const Field& u) {
  if (u.n_species() != m.n_species)
    throw std::invalid_argument("field species count does not match the model");
  Field out = make_field(*u.mesh, m.n_species);
  Eigen::VectorXd row(m.n_species);
  for (int c = 0; c < u.mesh->n_cells(); ++c) {
    row = u.values.row(c).transpose();
    check_state_row(m.X, row);
    const Eigen::MatrixXd g = m.g(cell_pos(u.mesh->cells[c]), row);
    if (g.rows() != m.n_species || g.cols() != m.n_species)
      throw std::domain_error("reaction matrix has the wrong shape");
    out.values.row(c) = (g * row).transpose();
  }
  return out;
}

Eigen::MatrixXd reaction_matrix(const ModelSpec& m, const CellPos& x,
                                const Eigen::VectorXd& u) {
  check_state_row(m.X, u);
  Eigen::MatrixXd g = m.g(x, u);
  if (g.rows() != m.n_species || g.cols() != m.n_species)
    throw std::domain_error("reaction matrix has the wrong shape");
  return g;
}

SpatialFn constant_fn(double value) {
  return [value](const CellPos&) { return value; };
}

ModelSpec builtin_logistic(double alpha, double lambda, double a) {
  if (!(alpha > 0.0)) throw std::invalid_argument("logistic diffusivity must be positive");
  if (a < 0.0) throw std::invalid_argument("logistic saturation must be nonnegative");
  ModelSpec m;
  m.name = "logistic";
  m.n_species = 1;
  m.X = StateSpaceX::positive_orthant(1);
  m.a = {[alpha](const CellPos&, const Eigen::VectorXd&) { return alpha; }};
  m.g = [lambda, a](const CellPos&, const Eigen::VectorXd& u) {
    Eigen::MatrixXd g(1, 1);
    g(0, 0) = lambda - a * u[0];
    return g;
  };
  return m;
}

ModelSpec builtin_porous_media(double alpha,
                               std::function<double(const CellPos&, double)> g) {
  if (alpha == 0.0)
    throw std::invalid_argument("porous-media exponent must be nonzero");
  if (!g) throw std::invalid_argument("reaction evaluator is empty");
  ModelSpec m;
  m.name = "porous_media";
  m.n_species = 1;
  m.X = StateSpaceX::positive_orthant(1);
  m.a = {[alpha](const CellPos&, const Eigen::VectorXd& u) {
    return std::pow(u[0], alpha);
  }};
  m.g = [g](const CellPos& x, const Eigen::VectorXd& u) {
    Eigen::MatrixXd out(1, 1);
    out(0, 0) = g(x, u[0]);
    return out;
  };
  return m;
}

ModelSpec builtin_two_population(const TwoPopulationParams& p) {
  for (const SpatialFn* fn : {&p.a, &p.b, &p.a0, &p.a1, &p.a2, &p.b0, &p.b1, &p.b2})
    if (!*fn) throw std::invalid_argument("two-population spatial function is empty");
  ModelSpec m;
  m.name = "two_population";
  m.n_species = 2;
  m.X = StateSpaceX::positive_orthant(2);
  const auto base_coeff = [](const SpatialFn& base, double eu, double ev) {
    return [base, eu, ev](const CellPos& x, const Eigen::VectorXd& u) {
      const double b = base(x);
      if (b < 0.0)
        throw std::domain_error("two-population base diffusivity sample is negative");
      return b + std::pow(u[0], eu) * std::pow(u[1], ev);
    };
  };
  m.a = {base_coeff(p.a, p.alpha, p.beta), base_coeff(p.b, p.gamma, p.delta)};
  m.g = [p](const CellPos& x, const Eigen::VectorXd& u) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
    g(0, 0) = p.a0(x) + p.a1(x) * u[0] + p.a2(x) * u[1];
    g(1, 1) = p.b0(x) + p.b1(x) * u[1] + p.b2(x) * u[0];
    return g;
  };
  return m;
}

}  // namespace sdrd
