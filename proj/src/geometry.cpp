#include "sdrd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sdrd {

namespace {

constexpr double kPi = 3.14159265358979323846;

double bump(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

// Recursive adaptive Simpson; integrand smooth on the transition zone.
template <class F>
double simpson_slice(const F& f, double a, double fa, double b, double fb, double fm,
                     double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_slice(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         simpson_slice(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_slice(f, a, fa, b, fb, fm, whole, tol, 48);
}

}  // namespace

void validate_domain(const DomainSpec& d) {
  if (!(d.extent > 0.0) || !std::isfinite(d.extent))
    throw std::invalid_argument("domain extent must be positive and finite");
  if (!(d.collar_depth > 0.0) || !(d.collar_depth <= 1.0))
    throw std::invalid_argument("collar depth must lie in (0, 1]");
  const double limit = d.kind == DomainKind::Interval ? 0.5 * d.extent : d.extent;
  if (!(d.collar_depth < limit))
    throw std::invalid_argument("collar depth must leave a nonempty interior");
}

std::optional<CollarCoord> collar_chart(const DomainSpec& d, double x1, double x2) {
  validate_domain(d);
  if (d.kind == DomainKind::Interval) {
    if (x1 < -1e-12 || x1 > d.extent + 1e-12)
      throw std::invalid_argument("point outside the closed interval");
    const double y_left = std::max(x1, 0.0);
    const double y_right = std::max(d.extent - x1, 0.0);
    const double y = std::min(y_left, y_right);
    if (y > d.collar_depth) return std::nullopt;
    CollarCoord c;
    c.y = y;
    c.component = y_left <= y_right ? 0 : 1;
    return c;
  }
  const double rad = std::hypot(x1, x2);
  if (rad > d.extent + 1e-12)
    throw std::invalid_argument("point outside the closed disk");
  const double y = std::max(d.extent - rad, 0.0);
  if (y > d.collar_depth) return std::nullopt;
  CollarCoord c;
  c.y = y;
  c.component = 0;
  double theta = std::atan2(x2, x1);
  if (theta < 0.0) theta += 2.0 * kPi;
  c.theta = theta;
  return c;
}

WeightProfile::WeightProfile(double epsilon, double s, bool unit)
    : eps_(epsilon), s_(s), unit_(unit) {
  if (!(epsilon > 0.0) || !(epsilon <= 1.0))
    throw std::invalid_argument("weight profile: epsilon must lie in (0, 1]");
  if (!unit && !(s >= 1.0))
    throw std::invalid_argument("weight profile: s must be >= 1");
  if (unit_) {
    tau_zone2_ = eps_ / 3.0;
    tau_zone1_ = 2.0 * eps_ / 3.0;
    return;
  }
  tau_zone2_ = eps_ / 3.0;  // r == 1 on [2eps/3, eps]
  const double transition =
      adaptive_simpson([this](double y) { return std::pow(r(y), -s_); }, eps_ / 3.0,
                       2.0 * eps_ / 3.0, 1e-14);
  tau_zone1_ = tau_zone2_ + transition;
}

double WeightProfile::chi(double y) const {
  if (unit_) return 0.0;
  const double z = eps_ / 3.0;
  if (y <= z) return 1.0;
  if (y >= 2.0 * z) return 0.0;
  const double t1 = (y - z) / z;
  const double t2 = (2.0 * z - y) / z;
  const double p1 = bump(t1), p2 = bump(t2);
  return p2 / (p1 + p2);
}

double WeightProfile::r(double y) const {
  if (unit_) return 1.0;
  const double c = chi(y);
  return c * y + 1.0 - c;
}

double WeightProfile::tau_of_y(double y) const {
  if (!(y > 0.0) && !unit_)
    throw std::invalid_argument("tau_of_y: y must be positive");
  if (y < 0.0 || y > eps_ * (1.0 + 1e-12))
    throw std::invalid_argument("tau_of_y: y must lie in (0, epsilon]");
  y = std::min(y, eps_);
  if (unit_) return eps_ - y;
  const double z = eps_ / 3.0;
  if (y >= 2.0 * z) return eps_ - y;
  if (y > z) {
    return tau_zone2_ + adaptive_simpson([this](double t) { return std::pow(r(t), -s_); },
                                         y, 2.0 * z, 1e-14);
  }
  // exact-weight zone, r == y
  if (s_ == 1.0) return tau_zone1_ + std::log(z / y);
  return tau_zone1_ + (std::pow(y, 1.0 - s_) - std::pow(z, 1.0 - s_)) / (s_ - 1.0);
}

double WeightProfile::y_of_tau(double tau) const {
  if (tau < -1e-12) throw std::invalid_argument("y_of_tau: tau must be >= 0");
  tau = std::max(tau, 0.0);
  if (unit_) {
    if (tau > eps_ * (1.0 + 1e-12))
      throw std::invalid_argument("y_of_tau: unit weight reaches the boundary at tau=epsilon");
    return std::max(eps_ - tau, 0.0);
  }
  const double z = eps_ / 3.0;
  if (tau <= tau_zone2_) return eps_ - tau;
  if (tau >= tau_zone1_) {
    if (s_ == 1.0) return z * std::exp(-(tau - tau_zone1_));
    return std::pow(std::pow(z, 1.0 - s_) + (s_ - 1.0) * (tau - tau_zone1_),
                    1.0 / (1.0 - s_));
  }
  // transition zone: safeguarded Newton on tau_of_y, dtau/dy = -r^{-s}
  double lo = z, hi = 2.0 * z;  // tau(lo) = tau_zone1 > tau > tau_zone2 = tau(hi)
  double y = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double f = tau_of_y(y) - tau;
    if (std::abs(f) < 1e-14 * (1.0 + tau)) break;
    if (f > 0.0) lo = y; else hi = y;  // tau decreasing in y
    double step = f * std::pow(r(y), s_);
    double next = y + step;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-16 * eps_) break;
    y = next;
  }
  return y;
}

WeightProfile build_weight_profile(double epsilon, double s) {
  return WeightProfile(epsilon, s, false);
}

WeightProfile make_unit_weight(double epsilon) { return WeightProfile(epsilon, 1.0, true); }

double Mesh::boundary_measure_total() const {
  return domain.kind == DomainKind::Interval ? 2.0 : 2.0 * kPi * domain.extent;
}

double Mesh::boundary_measure_element() const {
  return domain.kind == DomainKind::Interval ? 1.0
                                             : 2.0 * kPi * domain.extent / n_q;
}

int Mesh::collar_cell(int component, int layer, int q) const {
  if (domain.kind == DomainKind::Interval) {
    return component == 0 ? (n_collar - 1 - layer)
                          : (n_collar + n_interior + layer);
  }
  return n_interior * n_q + layer * n_q + q;
}

int Mesh::interior_cell(int index, int q) const {
  if (domain.kind == DomainKind::Interval) return n_collar + index;
  return index * n_q + q;
}

Eigen::VectorXd Mesh::volumes() const {
  Eigen::VectorXd v(n_cells());
  for (int i = 0; i < n_cells(); ++i) v[i] = cells[i].volume;
  return v;
}

namespace {

void check_seam_widths(double collar_width, double interior_width) {
  const double ratio = collar_width / interior_width;
  if (ratio > 10.0 || ratio < 0.1) {
    std::ostringstream os;
    os << "mesh rejected: seam cell widths mismatch beyond factor 10 (collar "
       << collar_width << " vs interior " << interior_width << ")";
    throw std::runtime_error(os.str());
  }
}

Mesh build_interval_mesh(const DomainSpec& d, const WeightProfile& w, int n_collar,
                         int n_interior, double tau_max) {
  Mesh m;
  m.domain = d;
  m.s_base = w.s();
  m.epsilon = w.epsilon();
  m.tau_max = tau_max;
  m.dtau = tau_max / n_collar;
  m.n_collar = n_collar;
  m.n_interior = n_interior;
  m.n_q = 1;

  const double L = d.extent;
  const double eps = w.epsilon();
  const double h = (L - 2.0 * eps) / n_interior;

  std::vector<double> y_center(n_collar), y_face(n_collar + 1);
  for (int l = 0; l < n_collar; ++l) y_center[l] = w.y_of_tau((l + 0.5) * m.dtau);
  for (int l = 0; l <= n_collar; ++l) y_face[l] = w.y_of_tau(l * m.dtau);
  check_seam_widths(eps - y_face[1], h);

  m.cells.resize(2 * n_collar + n_interior);
  for (int comp = 0; comp < 2; ++comp) {
    for (int l = 0; l < n_collar; ++l) {
      Cell c;
      c.region = Region::Collar;
      c.component = comp;
      c.layer = l;
      c.q = 0;
      c.tau = (l + 0.5) * m.dtau;
      c.y = y_center[l];
      c.x1 = comp == 0 ? c.y : L - c.y;
      c.volume = m.dtau;
      m.cells[m.collar_cell(comp, l, 0)] = c;
    }
  }
  for (int i = 0; i < n_interior; ++i) {
    Cell c;
    c.region = Region::Interior;
    c.layer = i;
    c.x1 = eps + (i + 0.5) * h;
    c.volume = h;
    m.cells[m.interior_cell(i)] = c;
  }

  for (int comp = 0; comp < 2; ++comp) {
    for (int l = 0; l + 1 < n_collar; ++l) {
      Face f;
      f.a = m.collar_cell(comp, l, 0);      // shallower
      f.b = m.collar_cell(comp, l + 1, 0);  // deeper
      f.kind = FaceKind::CollarNormal;
      f.area = 1.0;
      f.dist = m.dtau;
      f.half_a = f.half_b = 0.5 * m.dtau;
      f.y_face = y_face[l + 1];
      f.layer = l + 1;
      m.faces.push_back(f);
    }
    Face seam;
    seam.a = m.interior_cell(comp == 0 ? 0 : n_interior - 1);
    seam.b = m.collar_cell(comp, 0, 0);
    seam.kind = FaceKind::Seam;
    seam.area = 1.0;
    seam.half_a = 0.5 * h;
    seam.half_b = eps - y_center[0];
    seam.dist = seam.half_a + seam.half_b;
    seam.y_face = eps;
    seam.layer = 0;
    m.faces.push_back(seam);
  }
  for (int i = 0; i + 1 < n_interior; ++i) {
    Face f;
    f.a = m.interior_cell(i);
    f.b = m.interior_cell(i + 1);
    f.kind = FaceKind::InteriorAxial;
    f.area = 1.0;
    f.dist = h;
    f.half_a = f.half_b = 0.5 * h;
    m.faces.push_back(f);
  }
  return m;
}

Mesh build_disk_mesh(const DomainSpec& d, const WeightProfile& w, int n_collar,
                     int n_interior, double tau_max, int n_q) {
  if (n_q < 3)
    throw std::invalid_argument("disk mesh needs boundary resolution >= 3");
  Mesh m;
  m.domain = d;
  m.s_base = w.s();
  m.epsilon = w.epsilon();
  m.tau_max = tau_max;
  m.dtau = tau_max / n_collar;
  m.n_collar = n_collar;
  m.n_interior = n_interior;
  m.n_q = n_q;

  const double R = d.extent;
  const double eps = w.epsilon();
  const double Ri = R - eps;
  const double dR = Ri / n_interior;
  const double dth = 2.0 * kPi / n_q;
  const double w_q = R * dth;  // boundary element measure

  std::vector<double> y_center(n_collar), y_face(n_collar + 1);
  for (int l = 0; l < n_collar; ++l) y_center[l] = w.y_of_tau((l + 0.5) * m.dtau);
  for (int l = 0; l <= n_collar; ++l) y_face[l] = w.y_of_tau(l * m.dtau);
  check_seam_widths(eps - y_face[1], dR);

  m.cells.resize(n_interior * n_q + n_collar * n_q);
  for (int j = 0; j < n_interior; ++j) {
    const double r_in = j * dR, r_out = (j + 1) * dR, r_c = (j + 0.5) * dR;
    for (int q = 0; q < n_q; ++q) {
      Cell c;
      c.region = Region::Interior;
      c.layer = j;
      c.q = q;
      const double th = (q + 0.5) * dth;
      c.x1 = r_c * std::cos(th);
      c.x2 = r_c * std::sin(th);
      c.volume = 0.5 * dth * (r_out * r_out - r_in * r_in);
      m.cells[m.interior_cell(j, q)] = c;
    }
  }
  for (int l = 0; l < n_collar; ++l) {
    for (int q = 0; q < n_q; ++q) {
      Cell c;
      c.region = Region::Collar;
      c.component = 0;
      c.layer = l;
      c.q = q;
      c.tau = (l + 0.5) * m.dtau;
      c.y = y_center[l];
      const double th = (q + 0.5) * dth;
      const double rad = R - c.y;
      c.x1 = rad * std::cos(th);
      c.x2 = rad * std::sin(th);
      c.volume = m.dtau * w_q;
      m.cells[m.collar_cell(0, l, q)] = c;
    }
  }

  for (int j = 0; j < n_interior; ++j) {
    const double r_c = (j + 0.5) * dR;
    for (int q = 0; q < n_q; ++q) {
      if (j + 1 < n_interior) {
        Face f;
        f.a = m.interior_cell(j, q);
        f.b = m.interior_cell(j + 1, q);
        f.kind = FaceKind::InteriorAxial;
        f.area = (j + 1) * dR * dth;
        f.dist = dR;
        f.half_a = f.half_b = 0.5 * dR;
        m.faces.push_back(f);
      }
      Face g;
      g.a = m.interior_cell(j, q);
      g.b = m.interior_cell(j, (q + 1) % n_q);
      g.kind = FaceKind::InteriorAngular;
      g.area = dR;
      g.dist = r_c * dth;
      g.half_a = g.half_b = 0.5 * g.dist;
      m.faces.push_back(g);
    }
  }
  for (int q = 0; q < n_q; ++q) {
    Face seam;
    seam.a = m.interior_cell(n_interior - 1, q);
    seam.b = m.collar_cell(0, 0, q);
    seam.kind = FaceKind::Seam;
    seam.area = Ri * dth;
    seam.half_a = 0.5 * dR;
    seam.half_b = eps - y_center[0];
    seam.dist = seam.half_a + seam.half_b;
    seam.y_face = eps;
    seam.layer = 0;
    m.faces.push_back(seam);
  }
  for (int l = 0; l < n_collar; ++l) {
    for (int q = 0; q < n_q; ++q) {
      if (l + 1 < n_collar) {
        Face f;
        f.a = m.collar_cell(0, l, q);
        f.b = m.collar_cell(0, l + 1, q);
        f.kind = FaceKind::CollarNormal;
        f.area = w_q;
        f.dist = m.dtau;
        f.half_a = f.half_b = 0.5 * m.dtau;
        f.y_face = y_face[l + 1];
        f.layer = l + 1;
        m.faces.push_back(f);
      }
      Face g;
      g.a = m.collar_cell(0, l, q);
      g.b = m.collar_cell(0, l, (q + 1) % n_q);
      g.kind = FaceKind::CollarTangential;
      g.area = m.dtau;
      g.dist = w_q;
      g.half_a = g.half_b = 0.5 * w_q;
      g.y_face = y_center[l];
      g.layer = l;
      m.faces.push_back(g);
    }
  }
  return m;
}

}  // namespace

Mesh build_mesh(const DomainSpec& d, const WeightProfile& profile, int n_collar,
                int n_interior, double tau_max, int n_q) {
  validate_domain(d);
  if (std::abs(profile.epsilon() - d.collar_depth) > 1e-12)
    throw std::invalid_argument("weight profile epsilon does not match the collar depth");
  if (n_collar < 2 || n_interior < 1)
    throw std::invalid_argument("mesh needs n_collar >= 2 and n_interior >= 1");
  if (!(tau_max > 0.0) || !std::isfinite(tau_max))
    throw std::invalid_argument("tau_max must be positive and finite");
  if (profile.is_unit() && tau_max > profile.epsilon() * (1.0 + 1e-12))
    throw std::invalid_argument("unit weight: tau_max cannot exceed epsilon");
  if (d.kind == DomainKind::Interval) {
    if (n_q != 1)
      throw std::invalid_argument("interval boundary resolution is fixed at 1");
    return build_interval_mesh(d, profile, n_collar, n_interior, tau_max);
  }
  return build_disk_mesh(d, profile, n_collar, n_interior, tau_max, n_q);
}

namespace {

const char* region_name(Region r) { return r == Region::Interior ? "U" : "S"; }

const char* face_kind_name(FaceKind k) {
  switch (k) {
    case FaceKind::CollarNormal: return "collar_normal";
    case FaceKind::CollarTangential: return "collar_tangential";
    case FaceKind::Seam: return "seam";
    case FaceKind::InteriorAxial: return "interior_axial";
    case FaceKind::InteriorAngular: return "interior_angular";
  }
  return "?";
}

}  // namespace

std::string mesh_to_json(const Mesh& mesh) {
  nlohmann::json j;
  j["domain"] = {{"kind", mesh.domain.kind == DomainKind::Interval ? "interval" : "disk"},
                 {"extent", mesh.domain.extent},
                 {"collar_depth", mesh.domain.collar_depth}};
  j["s"] = mesh.s_base;
  j["tau_max"] = mesh.tau_max;
  j["n_collar"] = mesh.n_collar;
  j["n_interior"] = mesh.n_interior;
  j["boundary_resolution"] = mesh.n_q;
  auto cells = nlohmann::json::array();
  for (int i = 0; i < mesh.n_cells(); ++i) {
    const Cell& c = mesh.cells[i];
    cells.push_back({{"id", i},
                     {"region", region_name(c.region)},
                     {"component", c.component},
                     {"layer", c.layer},
                     {"q", c.q},
                     {"tau", c.tau},
                     {"y", c.y},
                     {"x", {c.x1, c.x2}},
                     {"volume", c.volume}});
  }
  j["cells"] = std::move(cells);
  auto faces = nlohmann::json::array();
  for (const Face& f : mesh.faces) {
    faces.push_back({{"a", f.a},
                     {"b", f.b},
                     {"kind", face_kind_name(f.kind)},
                     {"area", f.area},
                     {"dist", f.dist},
                     {"y_face", f.y_face}});
  }
  j["faces"] = std::move(faces);
  return j.dump(2);
}

std::string weight_profile_to_json(const WeightProfile& w) {
  nlohmann::json j;
  j["epsilon"] = w.epsilon();
  j["s"] = w.s();
  j["unit"] = w.is_unit();
  j["tau_zone1"] = w.tau_at_zone1();
  j["tau_zone2"] = w.tau_at_zone2();
  auto samples = nlohmann::json::array();
  const int n = 64;
  for (int i = 1; i <= n; ++i) {
    const double y = w.epsilon() * i / n;
    samples.push_back({{"y", y}, {"chi", w.chi(y)}, {"r", w.r(y)}, {"tau", w.tau_of_y(y)}});
  }
  j["samples"] = std::move(samples);
  return j.dump(2);
}

}  // namespace sdrd
