#include "sdrd/fields.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sdrd/format.hpp"

namespace sdrd {

Field make_field(const Mesh& mesh, int n_species) {
  if (n_species < 1) throw std::invalid_argument("field needs at least one species");
  Field f;
  f.mesh = &mesh;
  f.values = Eigen::ArrayXXd::Zero(mesh.n_cells(), n_species);
  return f;
}

Field make_constant_field(const Mesh& mesh, const std::vector<double>& per_species) {
  Field f = make_field(mesh, static_cast<int>(per_species.size()));
  for (int j = 0; j < f.n_species(); ++j) f.values.col(j) = per_species[j];
  return f;
}

StateSpaceX StateSpaceX::positive_orthant(int n) {
  StateSpaceX X;
  X.lower.assign(n, 0.0);
  X.upper.assign(n, std::numeric_limits<double>::infinity());
  return X;
}

StateSpaceX StateSpaceX::whole_space(int n) {
  StateSpaceX X;
  X.lower.assign(n, -std::numeric_limits<double>::infinity());
  X.upper.assign(n, std::numeric_limits<double>::infinity());
  return X;
}

void validate_state_space(const StateSpaceX& X, int n_species) {
  if (X.size() != n_species || static_cast<int>(X.upper.size()) != n_species)
    throw std::invalid_argument("state space bounds must match the species count");
  for (int i = 0; i < n_species; ++i)
    if (!(X.lower[i] < X.upper[i]))
      throw std::invalid_argument("state space box must be nonempty");
}

double dist_to_state_boundary(const Field& u, const StateSpaceX& X) {
  if (!u.is_valid()) throw std::invalid_argument("field is not valid");
  validate_state_space(X, u.n_species());
  double d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < u.n_species(); ++j) {
    const bool lo_fin = std::isfinite(X.lower[j]);
    const bool hi_fin = std::isfinite(X.upper[j]);
    if (!lo_fin && !hi_fin) continue;
    const double lo = X.lower[j], hi = X.upper[j];
    for (int c = 0; c < u.values.rows(); ++c) {
      const double v = u.values(c, j);
      if (lo_fin) d = std::min(d, v - lo);
      if (hi_fin) d = std::min(d, hi - v);
    }
  }
  return d;
}

bool in_state_space(const Field& u, const StateSpaceX& X) {
  if (u.mesh == nullptr) return false;
  if (!u.values.allFinite()) return false;
  validate_state_space(X, u.n_species());
  for (int j = 0; j < u.n_species(); ++j)
    for (int c = 0; c < u.values.rows(); ++c) {
      const double v = u.values(c, j);
      if (!(v > X.lower[j]) || !(v < X.upper[j])) return false;
    }
  return true;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_norm_args(const Field& u, double p, const WeightProfile& w) {
  if (!u.is_valid()) throw std::invalid_argument("field is not valid");
  if (!(p > 1.0) || !std::isfinite(p))
    throw std::invalid_argument("norm exponent p must lie in (1, inf)");
  if (std::abs(w.epsilon() - u.mesh->epsilon) > 1e-12)
    throw std::invalid_argument("weight profile epsilon does not match the mesh");
}

// Volume and normal-derivative scalings for a profile whose s differs from the
// mesh's base s (per-species weights share the mesh but reweight the collar).
struct Reweight {
  const Mesh* mesh;
  const WeightProfile* w;
  bool trivial;
  double vol(const Cell& c) const {
    if (trivial || c.region != Region::Collar) return c.volume;
    return c.volume * w->r_pow(c.y, mesh->s_base - w->s());
  }
  double normal_scale(double y) const {
    return trivial ? 1.0 : w->r_pow(y, w->s() - mesh->s_base);
  }
};

Reweight make_reweight(const Mesh& m, const WeightProfile& w) {
  return Reweight{&m, &w, w.is_unit() || w.s() == m.s_base};
}

// First difference along a ray: forward, backward at the last cell.
double diff1(const std::vector<double>& v, int i, double h) {
  const int n = static_cast<int>(v.size());
  if (i + 1 < n) return (v[i + 1] - v[i]) / h;
  return (v[i] - v[i - 1]) / h;
}

// Second difference: centred, shifted three-point stencil at ray ends.
double diff2(const std::vector<double>& v, int i, double h) {
  const int n = static_cast<int>(v.size());
  const int c = std::clamp(i, 1, n - 2);
  return (v[c - 1] - 2.0 * v[c] + v[c + 1]) / (h * h);
}

struct CollarRayView {
  std::vector<int> ids;  // by layer
};

std::vector<CollarRayView> collar_rays(const Mesh& m) {
  std::vector<CollarRayView> rays;
  const int comps = m.domain.boundary_components();
  for (int comp = 0; comp < comps; ++comp)
    for (int q = 0; q < m.n_q; ++q) {
      CollarRayView ray;
      ray.ids.resize(m.n_collar);
      for (int l = 0; l < m.n_collar; ++l) ray.ids[l] = m.collar_cell(comp, l, q);
      rays.push_back(std::move(ray));
    }
  return rays;
}

// Accumulates sum |term|^p * vol per derivative order; one collar + one interior
// group, combined additively at the end.
struct SobolevAccumulator {
  double p;
  std::array<double, 3> collar{0.0, 0.0, 0.0};
  std::array<double, 3> interior{0.0, 0.0, 0.0};
  void add(std::array<double, 3>& part, int order, double value, double vol) {
    part[order] += std::pow(std::abs(value), p) * vol;
  }
  double total(int k) const {
    double n = 0.0;
    for (int i = 0; i <= k; ++i) n += std::pow(collar[i], 1.0 / p);
    for (int i = 0; i <= k; ++i) n += std::pow(interior[i], 1.0 / p);
    return n;
  }
};

void accumulate_collar(const Mesh& m, const Eigen::ArrayXXd& vals, int k,
                       const Reweight& rw, SobolevAccumulator& acc) {
  const auto rays = collar_rays(m);
  const double dtau = m.dtau;
  const bool disk = m.domain.kind == DomainKind::Disk;
  const double arm = disk ? m.boundary_measure_element() : 0.0;  // R * dtheta
  const int nq = m.n_q, nl = m.n_collar;
  const int comps = m.domain.boundary_components();

  for (int j = 0; j < vals.cols(); ++j) {
    // per-ray normal derivatives
    for (const auto& ray : rays) {
      std::vector<double> v(nl);
      for (int l = 0; l < nl; ++l) v[l] = vals(ray.ids[l], j);
      for (int l = 0; l < nl; ++l) {
        const Cell& c = m.cells[ray.ids[l]];
        const double vol = rw.vol(c);
        const double ns = rw.normal_scale(c.y);
        acc.add(acc.collar, 0, v[l], vol);
        if (k >= 1) acc.add(acc.collar, 1, ns * diff1(v, l, dtau), vol);
        if (k >= 2) acc.add(acc.collar, 2, ns * ns * diff2(v, l, dtau), vol);
      }
    }
    if (!disk) continue;
    // tangential and mixed terms on the boundary rings (frozen metric arm)
    for (int comp = 0; comp < comps; ++comp) {
      for (int l = 0; l < nl; ++l) {
        std::vector<double> ring(nq), t1(nq);
        for (int q = 0; q < nq; ++q) ring[q] = vals(m.collar_cell(comp, l, q), j);
        for (int q = 0; q < nq; ++q)
          t1[q] = (ring[(q + 1) % nq] - ring[(q + nq - 1) % nq]) / (2.0 * arm);
        for (int q = 0; q < nq; ++q) {
          const Cell& c = m.cells[m.collar_cell(comp, l, q)];
          const double vol = rw.vol(c);
          if (k >= 1) acc.add(acc.collar, 0, t1[q], vol);
          if (k >= 2) {
            const double t2 = (ring[(q + 1) % nq] - 2.0 * ring[q] +
                               ring[(q + nq - 1) % nq]) /
                              (arm * arm);
            acc.add(acc.collar, 0, t2, vol);
            // mixed: forward tau-difference of the tangential derivative
            const int l2 = l + 1 < nl ? l + 1 : l - 1;
            const double q1 = (vals(m.collar_cell(comp, l2, (q + 1) % nq), j) -
                               vals(m.collar_cell(comp, l2, (q + nq - 1) % nq), j)) /
                              (2.0 * arm);
            const double ns = rw.normal_scale(c.y);
            acc.add(acc.collar, 1, ns * (q1 - t1[q]) / dtau * (l + 1 < nl ? 1.0 : -1.0),
                    vol);
          }
        }
      }
    }
  }
}

void accumulate_interior(const Mesh& m, const Eigen::ArrayXXd& vals, int k,
                         SobolevAccumulator& acc) {
  const bool disk = m.domain.kind == DomainKind::Disk;
  for (int j = 0; j < vals.cols(); ++j) {
    if (!disk) {
      const int n = m.n_interior;
      const double h = (m.domain.extent - 2.0 * m.epsilon) / n;
      std::vector<double> v(n);
      for (int i = 0; i < n; ++i) v[i] = vals(m.interior_cell(i), j);
      for (int i = 0; i < n; ++i) {
        const double vol = m.cells[m.interior_cell(i)].volume;
        acc.add(acc.interior, 0, v[i], vol);
        if (k >= 1) acc.add(acc.interior, 1, diff1(v, i, h), vol);
        if (k >= 2) acc.add(acc.interior, 2, diff2(v, i, h), vol);
      }
      continue;
    }
    const int nr = m.n_interior, nq = m.n_q;
    const double dR = (m.domain.extent - m.epsilon) / nr;
    const double dth = 2.0 * kPi / nq;
    // radial rays
    for (int q = 0; q < nq; ++q) {
      std::vector<double> v(nr);
      for (int i = 0; i < nr; ++i) v[i] = vals(m.interior_cell(i, q), j);
      for (int i = 0; i < nr; ++i) {
        const double vol = m.cells[m.interior_cell(i, q)].volume;
        acc.add(acc.interior, 0, v[i], vol);
        if (k >= 1) acc.add(acc.interior, 1, diff1(v, i, dR), vol);
        if (k >= 2) acc.add(acc.interior, 2, diff2(v, i, dR), vol);
      }
    }
    if (k < 1) continue;
    // angular rings
    for (int i = 0; i < nr; ++i) {
      const double arm = (i + 0.5) * dR * dth;
      std::vector<double> ring(nq), t1(nq);
      for (int q = 0; q < nq; ++q) ring[q] = vals(m.interior_cell(i, q), j);
      for (int q = 0; q < nq; ++q)
        t1[q] = (ring[(q + 1) % nq] - ring[(q + nq - 1) % nq]) / (2.0 * arm);
      for (int q = 0; q < nq; ++q) {
        const double vol = m.cells[m.interior_cell(i, q)].volume;
        acc.add(acc.interior, 1, t1[q], vol);
        if (k >= 2) {
          const double t2 =
              (ring[(q + 1) % nq] - 2.0 * ring[q] + ring[(q + nq - 1) % nq]) /
              (arm * arm);
          acc.add(acc.interior, 2, t2, vol);
          const int i2 = i + 1 < nr ? i + 1 : i - 1;
          const double arm2 = (i2 + 0.5) * dR * dth;
          const double q1 = (vals(m.interior_cell(i2, (q + 1) % nq), j) -
                             vals(m.interior_cell(i2, (q + nq - 1) % nq), j)) /
                            (2.0 * arm2);
          acc.add(acc.interior, 2, (q1 - t1[q]) / dR * (i + 1 < nr ? 1.0 : -1.0), vol);
        }
      }
    }
  }
}

void check_difference_depth(const Mesh& m, int k) {
  if (m.n_collar < k + 1 || m.n_interior < k + 1)
    throw std::invalid_argument("mesh too coarse for k-th differences");
  if (m.domain.kind == DomainKind::Disk && m.n_q < k + 1)
    throw std::invalid_argument("mesh too coarse for k-th differences");
}

}  // namespace

double weighted_lp_norm(const Field& u, double p, const WeightProfile& w) {
  check_norm_args(u, p, w);
  const Reweight rw = make_reweight(*u.mesh, w);
  double sum = 0.0;
  for (int j = 0; j < u.n_species(); ++j)
    for (int c = 0; c < u.mesh->n_cells(); ++c)
      sum += std::pow(std::abs(u.values(c, j)), p) * rw.vol(u.mesh->cells[c]);
  return std::pow(sum, 1.0 / p);
}

double weighted_sobolev_norm(const Field& u, int k, double p, const WeightProfile& w) {
  check_norm_args(u, p, w);
  if (k < 1 || k > 2) throw std::invalid_argument("sobolev order k must be 1 or 2");
  check_difference_depth(*u.mesh, k);
  const Reweight rw = make_reweight(*u.mesh, w);
  SobolevAccumulator acc;
  acc.p = p;
  accumulate_collar(*u.mesh, u.values, k, rw, acc);
  accumulate_interior(*u.mesh, u.values, k, acc);
  return acc.total(k);
}

double bc_norm(const Field& u, int k, const WeightProfile& w) {
  if (!u.is_valid()) throw std::invalid_argument("field is not valid");
  if (k < 0 || k > 1) throw std::invalid_argument("bc norm order k must be 0 or 1");
  if (std::abs(w.epsilon() - u.mesh->epsilon) > 1e-12)
    throw std::invalid_argument("weight profile epsilon does not match the mesh");
  const double bc0 = u.values.abs().maxCoeff();
  if (k == 0) return bc0;
  check_difference_depth(*u.mesh, 1);
  const Reweight rw = make_reweight(*u.mesh, w);
  double grad = 0.0;
  for (const Face& f : u.mesh->faces) {
    const double scale =
        f.kind == FaceKind::CollarNormal ? rw.normal_scale(f.y_face) : 1.0;
    for (int j = 0; j < u.n_species(); ++j) {
      const double q = std::abs(u.values(f.b, j) - u.values(f.a, j)) / f.dist;
      grad = std::max(grad, scale * q);
    }
  }
  return bc0 + grad;
}

double trajectory_norm(const std::vector<Field>& traj, double p, double dt,
                       const WeightProfile& w) {
  if (traj.size() < 2)
    throw std::invalid_argument("trajectory norm needs at least two samples");
  if (!(dt > 0.0)) throw std::invalid_argument("trajectory sample spacing must be positive");
  const Mesh* mesh = traj.front().mesh;
  for (const Field& f : traj)
    if (f.mesh != mesh) throw std::invalid_argument("trajectory mixes meshes");
  double space_p = 0.0;   // L_p(J, W_p^2)
  double lp_time = 0.0;   // L_p(J, L_p)
  double dudt_p = 0.0;    // time-derivative part of W_p^1(J, L_p)
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double wk = weighted_sobolev_norm(traj[k], 2, p, w);
    space_p += dt * std::pow(wk, p);
    lp_time += dt * std::pow(weighted_lp_norm(traj[k], p, w), p);
    Field diff = traj[k];
    diff.values = (traj[k].values - traj[k - 1].values) / dt;
    dudt_p += dt * std::pow(weighted_lp_norm(diff, p, w), p);
  }
  const double part_space = std::pow(space_p, 1.0 / p);
  const double part_time = std::pow(lp_time + dudt_p, 1.0 / p);
  return std::max(part_space, part_time);
}

double deepest_layer_fraction(const Field& u, double p, const WeightProfile& w) {
  check_norm_args(u, p, w);
  const Reweight rw = make_reweight(*u.mesh, w);
  double deep = 0.0, total = 0.0;
  for (int j = 0; j < u.n_species(); ++j)
    for (int c = 0; c < u.mesh->n_cells(); ++c) {
      const Cell& cell = u.mesh->cells[c];
      const double m = std::pow(std::abs(u.values(c, j)), p) * rw.vol(cell);
      total += m;
      if (cell.region == Region::Collar && cell.layer == u.mesh->n_collar - 1)
        deep += m;
    }
  return total > 0.0 ? deep / total : 0.0;
}

NormReport norm_report(const Field& u, double p, const WeightProfile& w) {
  NormReport r;
  r.lp = weighted_lp_norm(u, p, w);
  r.w1p = weighted_sobolev_norm(u, 1, p, w);
  r.w2p = weighted_sobolev_norm(u, 2, p, w);
  r.bc0 = bc_norm(u, 0, w);
  r.bc1s = bc_norm(u, 1, w);
  r.p = p;
  r.s = w.s();
  return r;
}

std::string norm_report_to_json(const NormReport& r) {
  nlohmann::json j;
  j["lp"] = r.lp;
  j["w1p"] = r.w1p;
  j["w2p"] = r.w2p;
  j["bc0"] = r.bc0;
  j["bc1s"] = r.bc1s;
  j["p"] = r.p;
  j["s"] = r.s;
  return j.dump(2);
}

std::string field_to_csv(const Field& u, const std::vector<std::string>& names) {
  if (!u.is_valid()) throw std::invalid_argument("field is not valid");
  if (static_cast<int>(names.size()) != u.n_species())
    throw std::invalid_argument("species name count mismatch");
  std::ostringstream os;
  os << "cell,region,x1,x2,y";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  for (int c = 0; c < u.mesh->n_cells(); ++c) {
    const Cell& cell = u.mesh->cells[c];
    os << c << ',' << (cell.region == Region::Interior ? 'U' : 'S') << ','
       << g17(cell.x1) << ',' << g17(cell.x2) << ','
       << (cell.region == Region::Collar ? g17(cell.y) : std::string());
    for (int j = 0; j < u.n_species(); ++j) os << ',' << g17(u.values(c, j));
    os << '\n';
  }
  return os.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Field field_from_csv(const Mesh& mesh, const std::string& csv,
                     const std::vector<std::string>& names) {
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("field csv: empty input");
  const auto header = split_csv_line(line);
  std::vector<int> cols;
  for (const auto& n : names) {
    auto it = std::find(header.begin(), header.end(), n);
    if (it == header.end())
      throw std::runtime_error("field csv: missing species column " + n);
    cols.push_back(static_cast<int>(it - header.begin()));
  }
  Field f = make_field(mesh, static_cast<int>(names.size()));
  int row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (row >= mesh.n_cells()) throw std::runtime_error("field csv: too many rows");
    const auto parts = split_csv_line(line);
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j] >= static_cast<int>(parts.size()))
        throw std::runtime_error("field csv: short row");
      f.values(row, static_cast<int>(j)) = std::stod(parts[cols[j]]);
    }
    ++row;
  }
  if (row != mesh.n_cells())
    throw std::runtime_error("field csv: row count does not match the mesh");
  return f;
}

}  // namespace sdrd
