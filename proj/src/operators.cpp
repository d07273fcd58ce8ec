#include "sdrd/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdrd/format.hpp"

namespace sdrd {

namespace {

void check_profile(const WeightProfile& w, const Mesh& mesh) {
  if (std::abs(w.epsilon() - mesh.epsilon) > 1e-12)
    throw std::invalid_argument("weight profile epsilon does not match the mesh");
}

void check_vector(const Eigen::VectorXd& v, const Mesh& mesh, const char* what) {
  if (v.size() != mesh.n_cells())
    throw std::invalid_argument(std::string(what) + " size does not match the mesh");
  if (!v.allFinite())
    throw std::invalid_argument(std::string(what) + " contains non-finite values");
}

// Face/volume scalings for a species whose weight exponent differs from the
// mesh's base s. Collar-normal face coefficients gain r^{s - s_base}, tangential
// ones r^{s_base - s} (the cylinder volume element of that species), collar cell
// volumes r^{s_base - s}. Seam and interior faces sit where r == 1.
struct SpeciesScale {
  const Mesh* mesh;
  const WeightProfile* w;
  bool trivial;

  double coeff(const Face& f, const Cell& c) const {
    if (trivial) return 1.0;
    if (f.kind == FaceKind::CollarNormal) return w->r_pow(c.y, w->s() - mesh->s_base);
    if (f.kind == FaceKind::CollarTangential)
      return w->r_pow(c.y, mesh->s_base - w->s());
    return 1.0;
  }
  double vol(const Cell& c) const {
    if (trivial || c.region != Region::Collar) return c.volume;
    return c.volume * w->r_pow(c.y, mesh->s_base - w->s());
  }
  double normal_scale(double y) const {
    return trivial ? 1.0 : w->r_pow(y, w->s() - mesh->s_base);
  }
};

SpeciesScale make_scale(const Mesh& m, const WeightProfile& w) {
  return SpeciesScale{&m, &w, w.is_unit() || w.s() == m.s_base};
}

// Two-point transmissibility with distance-weighted harmonic coefficient average.
double conductance(const Face& f, double aa, double ab) {
  return f.area / (f.half_a / aa + f.half_b / ab);
}

double harmonic_face_value(const Face& f, double aa, double ab) {
  return f.dist / (f.half_a / aa + f.half_b / ab);
}

}  // namespace

FaceValues grad_s(const Eigen::VectorXd& u, const WeightProfile& w, const Mesh& mesh) {
  check_profile(w, mesh);
  check_vector(u, mesh, "field");
  const SpeciesScale sc = make_scale(mesh, w);
  FaceValues g;
  g.mesh = &mesh;
  g.v.resize(static_cast<Eigen::Index>(mesh.faces.size()));
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const Face& f = mesh.faces[i];
    if (f.kind == FaceKind::CollarNormal) {
      // a is the shallower cell, so this is minus the tau quotient: the weighted
      // derivative along the inward normal.
      g.v[static_cast<Eigen::Index>(i)] =
          (u[f.a] - u[f.b]) / f.dist * sc.normal_scale(f.y_face);
    } else {
      g.v[static_cast<Eigen::Index>(i)] = (u[f.b] - u[f.a]) / f.dist;
    }
  }
  return g;
}

FaceValues degenerate_flux(const Eigen::VectorXd& u, const Eigen::VectorXd& a_cells,
                           const WeightProfile& w, const Mesh& mesh) {
  check_vector(a_cells, mesh, "coefficient");
  const FaceValues g = grad_s(u, w, mesh);
  FaceValues flux;
  flux.mesh = &mesh;
  flux.v.resize(g.v.size());
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const Face& f = mesh.faces[i];
    const double af = harmonic_face_value(f, a_cells[f.a], a_cells[f.b]);
    const Eigen::Index k = static_cast<Eigen::Index>(i);
    if (f.kind == FaceKind::CollarNormal) {
      flux.v[k] = af * w.r_pow(f.y_face, w.s()) * g.v[k];
    } else {
      flux.v[k] = af * g.v[k];
    }
  }
  return flux;
}

OperatorMatrix assemble_As(const Eigen::VectorXd& a_cells, const WeightProfile& w,
                           const Mesh& mesh) {
  check_profile(w, mesh);
  check_vector(a_cells, mesh, "coefficient");
  if ((a_cells.array() <= 0.0).any())
    throw std::invalid_argument("coefficient values must be positive");
  const SpeciesScale sc = make_scale(mesh, w);
  const int n = mesh.n_cells();

  OperatorMatrix op;
  op.vol.resize(n);
  for (int i = 0; i < n; ++i) op.vol[i] = sc.vol(mesh.cells[i]);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(4 * mesh.faces.size() + static_cast<std::size_t>(n));
  for (const Face& f : mesh.faces) {
    const double aa = a_cells[f.a] * sc.coeff(f, mesh.cells[f.a]);
    const double ab = a_cells[f.b] * sc.coeff(f, mesh.cells[f.b]);
    const double c = conductance(f, aa, ab);
    trips.emplace_back(f.a, f.a, c / op.vol[f.a]);
    trips.emplace_back(f.a, f.b, -c / op.vol[f.a]);
    trips.emplace_back(f.b, f.b, c / op.vol[f.b]);
    trips.emplace_back(f.b, f.a, -c / op.vol[f.b]);
  }
  op.A.resize(n, n);
  op.A.setFromTriplets(trips.begin(), trips.end());
  op.A.makeCompressed();
  return op;
}

Eigen::VectorXd apply_As(const OperatorMatrix& op, const Eigen::VectorXd& u) {
  if (u.size() != op.A.rows())
    throw std::invalid_argument("field size does not match the operator");
  return op.A * u;
}

std::vector<FluxSample> normal_flux_profile(const Eigen::VectorXd& u,
                                            const Eigen::VectorXd& a_cells,
                                            const WeightProfile& w, const Mesh& mesh) {
  const FaceValues flux = degenerate_flux(u, a_cells, w, mesh);
  std::vector<FluxSample> out(static_cast<std::size_t>(mesh.n_collar - 1));
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const Face& f = mesh.faces[i];
    if (f.kind != FaceKind::CollarNormal) continue;
    FluxSample& s = out[static_cast<std::size_t>(f.layer - 1)];
    s.y = f.y_face;
    s.max_abs = std::max(s.max_abs, std::abs(flux.v[static_cast<Eigen::Index>(i)]));
  }
  return out;
}

std::vector<FluxSample> tangential_flux_profile(const Eigen::VectorXd& u,
                                                const Eigen::VectorXd& a_cells,
                                                const Mesh& mesh) {
  check_vector(u, mesh, "field");
  check_vector(a_cells, mesh, "coefficient");
  std::vector<FluxSample> out(static_cast<std::size_t>(mesh.n_collar));
  bool any = false;
  for (const Face& f : mesh.faces) {
    if (f.kind != FaceKind::CollarTangential) continue;
    any = true;
    const Cell& c = mesh.cells[f.a];
    const double af = harmonic_face_value(f, a_cells[f.a], a_cells[f.b]);
    FluxSample& s = out[static_cast<std::size_t>(c.layer)];
    s.y = c.y;
    s.max_abs = std::max(s.max_abs, std::abs(af * (u[f.b] - u[f.a]) / f.dist));
  }
  if (!any) out.clear();
  return out;
}

OperatorAudit audit_operator(const OperatorMatrix& op, unsigned seed, int n_probes) {
  const int n = static_cast<int>(op.A.rows());
  OperatorAudit audit;

  Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  double max_pos_off = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < op.A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.A, k); it; ++it) {
      row_sum[it.row()] += it.value();
      if (it.row() == it.col())
        diag[it.row()] = it.value();
      else
        max_pos_off = std::max(max_pos_off, it.value());
    }
  for (int i = 0; i < n; ++i) {
    const double ref = diag[i] != 0.0 ? std::abs(diag[i]) : 1.0;
    audit.max_rel_row_sum = std::max(audit.max_rel_row_sum, std::abs(row_sum[i]) / ref);
  }
  audit.min_diag = n > 0 ? diag.minCoeff() : 0.0;
  audit.max_positive_offdiag = std::isfinite(max_pos_off) ? max_pos_off : 0.0;

  // Volume-weighted symmetry: V A should be symmetric.
  Eigen::SparseMatrix<double> b = op.vol.asDiagonal() * op.A;
  Eigen::SparseMatrix<double> d = b - Eigen::SparseMatrix<double>(b.transpose());
  double max_b = 0.0, max_d = 0.0;
  for (int k = 0; k < b.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(b, k); it; ++it)
      max_b = std::max(max_b, std::abs(it.value()));
  for (int k = 0; k < d.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it)
      max_d = std::max(max_d, std::abs(it.value()));
  audit.max_rel_asym = max_b > 0.0 ? max_d / max_b : 0.0;

  std::mt19937 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  double qmin = std::numeric_limits<double>::infinity();
  for (int p = 0; p < n_probes; ++p) {
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u[i] = nd(gen);
    const Eigen::VectorXd au = op.A * u;
    const double num = u.dot(op.vol.cwiseProduct(au));
    const double den = u.dot(op.vol.cwiseProduct(u));
    qmin = std::min(qmin, num / den);
  }
  audit.min_quadratic_form = n_probes > 0 ? qmin : 0.0;
  return audit;
}

std::string operator_to_coordinate_text(const OperatorMatrix& op) {
  struct Entry {
    int r, c;
    double v;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(op.A.nonZeros()));
  for (int k = 0; k < op.A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.A, k); it; ++it)
      entries.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()),
                         it.value()});
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    return x.r != y.r ? x.r < y.r : x.c < y.c;
  });
  std::string out = std::to_string(op.A.rows()) + " " + std::to_string(op.A.cols()) +
                    " " + std::to_string(entries.size()) + "\n";
  for (const Entry& e : entries)
    out += std::to_string(e.r) + " " + std::to_string(e.c) + " " + g17(e.v) + "\n";
  return out;
}

}  // namespace sdrd
