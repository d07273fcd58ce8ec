#pragma once

// Domain, boundary-distance weight and collar mesh.
//
// The domain carries a collar S of depth epsilon along its boundary. Inside the
// collar the normal coordinate y = dist(x, boundary) is replaced by the stretched
// coordinate tau with dtau/dy = -r(y)^{-s}, tau(epsilon) = 0, where
// r(y) = chi(y)*y + 1 - chi(y) is the smoothed boundary-distance weight
// (r = y for y <= epsilon/3, r = 1 for y >= 2*epsilon/3). In tau the collar is a
// half-infinite cylinder over the boundary, truncated at tau_max; cells are
// uniform in tau and carry the cylinder volume element dtau x dvol(boundary).

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sdrd {

enum class DomainKind { Interval, Disk };

// Interval [0, extent] (dimension 1) or disk of radius extent (dimension 2).
struct DomainSpec {
  DomainKind kind = DomainKind::Interval;
  double extent = 2.0;
  double collar_depth = 0.5;  // epsilon, in (0,1] and < extent/2

  int dimension() const { return kind == DomainKind::Interval ? 1 : 2; }
  int boundary_components() const { return kind == DomainKind::Interval ? 2 : 1; }

  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

void validate_domain(const DomainSpec& d);  // throws std::invalid_argument

// Result of locating a point relative to the collar.
struct CollarCoord {
  double y = 0.0;     // distance to the boundary, 0 < y <= epsilon
  int component = 0;  // interval: 0 = left endpoint, 1 = right; disk: 0
  double theta = 0.0; // disk: angular coordinate in [0, 2pi); interval: 0
};

// Identifies the collar position of x, or nullopt when dist(x, boundary) > epsilon.
// Total on the closed domain; throws std::invalid_argument for x outside it.
std::optional<CollarCoord> collar_chart(const DomainSpec& d, double x1, double x2 = 0.0);

// Smoothed weight r and the stretched coordinate tau for one (epsilon, s) pair.
// Immutable after construction.
class WeightProfile {
 public:
  // unit == false: the smoothed boundary-distance weight described above.
  // unit == true: r == 1 identically (degenerate machinery disabled), tau = epsilon - y.
  WeightProfile(double epsilon, double s, bool unit = false);

  double epsilon() const { return eps_; }
  double s() const { return s_; }
  bool is_unit() const { return unit_; }

  double chi(double y) const;   // smooth cutoff: 1 on [0, eps/3], 0 on [2eps/3, eps]
  double r(double y) const;     // chi*y + 1 - chi, in (0, 1]
  double r_pow(double y, double expo) const { return std::pow(r(y), expo); }

  // tau(y) = integral of r(sigma)^{-s} over [y, epsilon]; strictly decreasing in y,
  // tau(epsilon) = 0. Closed forms on the two outer zones, adaptive quadrature on
  // the transition zone. Rel. accuracy ~1e-13.
  double tau_of_y(double y) const;
  // Inverse of tau_of_y on (0, epsilon]; closed forms where available, otherwise a
  // safeguarded Newton iteration on tau_of_y.
  double y_of_tau(double tau) const;

  double tau_at_zone2() const { return tau_zone2_; }  // tau(2eps/3) = eps/3
  double tau_at_zone1() const { return tau_zone1_; }  // tau(eps/3)

 private:
  double eps_;
  double s_;
  bool unit_;
  double tau_zone2_;
  double tau_zone1_;
};

// Profile with the pinned smooth cutoff; epsilon in (0,1], s >= 1.
WeightProfile build_weight_profile(double epsilon, double s);
// Weight forced to r == 1: collar cells become an ordinary uniform y-grid and the
// truncation face at tau_max = epsilon is a plain zero-flux boundary.
WeightProfile make_unit_weight(double epsilon);

enum class Region : std::uint8_t { Interior, Collar };

enum class FaceKind : std::uint8_t {
  CollarNormal,      // between collar layers of one ray, area in the cylinder metric
  CollarTangential,  // disk only, between angular neighbours at equal depth
  Seam,              // collar layer 0 <-> adjacent interior cell, Euclidean metric
  InteriorAxial,     // interval interior / disk radial
  InteriorAngular    // disk interior, between angular neighbours
};

struct Cell {
  Region region = Region::Interior;
  int component = -1;  // boundary component for collar cells, -1 interior
  int layer = -1;      // collar: depth index, 0 at the seam; disk interior: ring index
  int q = 0;           // boundary index (angular sector); interval: 0
  double tau = 0.0;    // collar only: cell-centre stretched coordinate
  double y = 0.0;      // collar only: cell-centre boundary distance
  double x1 = 0.0, x2 = 0.0;  // physical centre (interval: x1; disk: Cartesian)
  double volume = 0.0;        // cylinder-metric volume on the collar, Euclidean inside
};

struct Face {
  int a = -1, b = -1;  // adjacent cell ids; orientation a -> b
  FaceKind kind = FaceKind::InteriorAxial;
  double area = 0.0;
  double dist = 0.0;      // centre-to-centre arm in the metric of this face
  double half_a = 0.0;    // centre-to-face arms, half_a + half_b == dist
  double half_b = 0.0;
  double y_face = 0.0;    // collar-normal/seam faces: boundary distance of the face
  int layer = -1;         // collar-normal: deeper layer index the face leads into
};

// Finite-volume mesh: interior cells plus one truncated collar cylinder per
// boundary component. Immutable after construction; safe to share across threads.
// The deepest collar layer (tau = tau_max) has no outer neighbour; that closure is
// the zero-flux truncation face. All domain-boundary closures are zero-flux.
struct Mesh {
  DomainSpec domain;
  double s_base = 1.0;       // s of the profile the mesh was built with
  double epsilon = 0.0;
  double tau_max = 0.0;
  double dtau = 0.0;
  int n_collar = 0;          // layers per boundary component
  int n_interior = 0;        // interval: cells across the interior; disk: rings
  int n_q = 1;               // angular cells per boundary component (interval: 1)
  std::vector<Cell> cells;
  std::vector<Face> faces;

  int n_cells() const { return static_cast<int>(cells.size()); }
  double boundary_measure_total() const;   // |Gamma|: interval 2, disk 2*pi*R
  double boundary_measure_element() const; // per q-sector
  // id of collar cell (component, layer, q)
  int collar_cell(int component, int layer, int q) const;
  // id of interior cell (interval: index along axis, q ignored; disk: ring, q)
  int interior_cell(int index, int q = 0) const;
  Eigen::VectorXd volumes() const;
};

// Builds the mesh for the domain; profile.epsilon() must equal d.collar_depth.
// Uniform in tau on the collar (n_collar layers on [0, tau_max]), uniform interior
// (interval: axis cells; disk: radial rings x n_q angular sectors; interval forces
// n_q = 1). Rejects seam cell-width mismatch beyond a factor 10 and collars deeper
// than the domain allows.
Mesh build_mesh(const DomainSpec& d, const WeightProfile& profile, int n_collar,
                int n_interior, double tau_max, int n_q = 1);

std::string mesh_to_json(const Mesh& mesh);
std::string weight_profile_to_json(const WeightProfile& profile);

}  // namespace sdrd
