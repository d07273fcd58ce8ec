#pragma once

// Finite-volume assembly of the weighted divergence-form operator
//   A u = -div_s(a grad_s u)
// on the collar mesh. In the stretched coordinate the collar-normal part is the
// uniformly elliptic -d/dtau (a d/dtau), so assembly is a plain two-point flux
// scheme with harmonic face coefficients; all boundary-distance weighting lives
// in the coordinate map and, for species whose weight exponent differs from the
// mesh's base s, in explicit face/volume scalings.
//
// Sign and orientation conventions: faces are oriented a -> b; collar-normal
// faces order a = shallower (closer to the seam), b = deeper. grad_s stores on
// collar-normal faces the weighted inward-normal derivative (which is minus the
// tau difference quotient); all other faces store the plain oriented quotient.
// The physical collar-normal flux carries one more factor r(y_face)^s.

#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "sdrd/fields.hpp"
#include "sdrd/geometry.hpp"

namespace sdrd {

// Sparse operator for one species together with its cell-volume vector.
// Invariants (checked by audit_operator): zero row sums, nonnegative diagonal,
// nonpositive off-diagonal, volume-weighted symmetry, positive semidefinite.
struct OperatorMatrix {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd vol;
};

// Per-face values aligned with mesh.faces.
struct FaceValues {
  const Mesh* mesh = nullptr;
  Eigen::ArrayXd v;
};

// Weighted gradient of one species' cell values; see conventions above.
FaceValues grad_s(const Eigen::VectorXd& u, const WeightProfile& w, const Mesh& mesh);

// Physical flux per face: a r^{2s} du/dnu on collar-normal faces, a times the
// tangential/interior gradient elsewhere; a is harmonically averaged per face.
FaceValues degenerate_flux(const Eigen::VectorXd& u, const Eigen::VectorXd& a_cells,
                           const WeightProfile& w, const Mesh& mesh);

// Assembles A for coefficient samples a_cells > 0. The profile's s may differ
// from the mesh's base s (per-species weights); epsilon must match.
OperatorMatrix assemble_As(const Eigen::VectorXd& a_cells, const WeightProfile& w,
                           const Mesh& mesh);

Eigen::VectorXd apply_As(const OperatorMatrix& op, const Eigen::VectorXd& u);

struct FluxSample {
  double y = 0.0;        // boundary distance of the face
  double max_abs = 0.0;  // max |flux| over the faces of this depth
};

// Collar-normal physical flux magnitude per internal collar depth, ordered from
// the seam inward (y decreasing).
std::vector<FluxSample> normal_flux_profile(const Eigen::VectorXd& u,
                                            const Eigen::VectorXd& a_cells,
                                            const WeightProfile& w, const Mesh& mesh);

// Max |a grad_tangential u| per collar layer (disk); layer order, y decreasing.
std::vector<FluxSample> tangential_flux_profile(const Eigen::VectorXd& u,
                                                const Eigen::VectorXd& a_cells,
                                                const Mesh& mesh);

struct OperatorAudit {
  double max_rel_row_sum = 0.0;    // |row sum| / diagonal
  double max_rel_asym = 0.0;       // volume-weighted symmetry defect, relative
  double min_quadratic_form = 0.0; // min over probes of u' V A u / (u' V u)
  double max_positive_offdiag = 0.0;
  double min_diag = 0.0;
};

OperatorAudit audit_operator(const OperatorMatrix& op, unsigned seed = 1,
                             int n_probes = 100);

std::string operator_to_coordinate_text(const OperatorMatrix& op);

}  // namespace sdrd
