// Local Hellinger-Reissner virtual element machinery: degrees of freedom,
// closed-form traction/divergence reconstruction, the projector onto the
// polynomial stress space, the two stabilizations, and the stabilized
// local bilinear form.
//
// Degrees of freedom of a discrete stress tau:
//   edge:     (1/h_e) int_e (tau n) . m_j  for the scaled edge basis,
//   interior: (h_K/|K|) int_K div(tau) . m_perp_i.
// Edge dofs come first, edges in polygon order, then interior dofs.

#pragma once

#include <hrvem/elasticity.hpp>
#include <hrvem/geometry.hpp>
#include <hrvem/polybasis.hpp>
#include <hrvem/quadrature.hpp>
#include <hrvem/types.hpp>

#include <vector>

namespace hrvem {

struct DofDescriptor {
  enum class Kind { EdgeTraction, InteriorDivergence };
  Kind kind = Kind::EdgeTraction;
  int edge = -1;   // owning edge for traction dofs
  int member = 0;  // basis member within the edge / interior basis
  int index = 0;   // local dof index
};

enum class StabWeight { InverseMu, TraceD };

class HrLocalSpace {
 public:
  HrLocalSpace(const Polygon& polygon, int degree, const Material& material);

  const Polygon& polygon() const { return polygon_; }
  int degree() const { return degree_; }
  const Material& material() const { return material_; }
  int num_dofs() const { return static_cast<int>(dofs_.size()); }
  const std::vector<DofDescriptor>& dofs() const { return dofs_; }
  int edge_dof_offset(int e) const { return e * 2 * (degree_ + 1); }
  int interior_dof_offset() const {
    return polygon_.num_edges() * 2 * (degree_ + 1);
  }
  int num_interior_dofs() const { return rm_perp_.num_members(); }

  const QuadratureRule& quad() const { return quad_; }
  const EdgeBasis& edge_basis(int e) const { return edge_bases_[e]; }
  const ScaledBasis& rm() const { return rm_; }
  const ScaledBasis& rm_perp() const { return rm_perp_; }
  const StressBasis& stress_basis() const { return stress_; }

  /// Edge traction coefficients from dofs: c_e = traction_map(e) * dofs.
  const Matrix& traction_map(int e) const { return traction_maps_[e]; }
  /// Rigid-motion part of the divergence (3 x N) from the boundary dofs.
  const Matrix& div_rm_map() const { return div_rm_map_; }
  /// RM-orthogonal part of the divergence (m_perp x N) from interior dofs.
  const Matrix& div_perp_map() const { return div_perp_map_; }

  /// Dofs -> coefficients in the polynomial stress basis (m_T x N).
  const Matrix& projector_coeffs() const { return projector_coeffs_; }
  /// Dof functionals evaluated on the stress basis members (N x m_T).
  const Matrix& stress_dof_matrix() const { return stress_dofs_; }
  /// Projector in dof coordinates (N x N).
  Matrix projector_dofs() const { return stress_dofs_ * projector_coeffs_; }

  const Matrix& edge_mass(int e) const { return edge_mass_[e]; }
  const Matrix& rm_gram() const { return rm_gram_; }
  const Matrix& perp_mass() const { return perp_mass_; }
  /// Compliance-weighted Gram of the stress basis members.
  const Matrix& stress_compliance_gram() const { return stress_gram_d_; }
  /// Spectral condition number of the projector stiffness system.
  Scalar projector_condition() const { return projector_condition_; }

 private:
  Polygon polygon_;
  int degree_;
  Material material_;
  std::vector<DofDescriptor> dofs_;
  QuadratureRule quad_;
  std::vector<EdgeBasis> edge_bases_;
  ScaledBasis rm_;
  ScaledBasis rm_perp_;
  StressBasis stress_;
  std::vector<Matrix> edge_mass_;
  std::vector<Matrix> traction_maps_;
  Matrix rm_gram_;
  Matrix perp_mass_;
  Matrix div_rm_map_;
  Matrix div_perp_map_;
  Matrix stress_dofs_;
  Matrix projector_coeffs_;
  Matrix stress_gram_d_;
  Scalar projector_condition_ = 1.0;
};

/// Dof functionals applied to a polynomial stress given by packed tensor
/// coefficients (3 * dim P_p) in the element frame.
Vector polynomial_stress_dofs(const HrLocalSpace& space, const Vector& tensor_coeffs);

/// Traction polynomial on edge e evaluated at points on that edge (n x 2).
Matrix traction_values(const HrLocalSpace& space, const Vector& dofs, int e,
                       const std::vector<Vector2>& points);

/// Closed-form divergence evaluated at points (n x 2).
Matrix divergence_values(const HrLocalSpace& space, const Vector& dofs,
                         const std::vector<Vector2>& points);

/// Projection-based stabilization
///   S = w [ sum_e (|K|/h_e) (sigma n, tau n)_e + |K| (Pi div sigma, Pi div tau)_K ]
/// with w = 1/mu or tr(D); `reduced` drops the divergence term. Both terms
/// scale like the squared local L2 norm under uniform scaling.
Matrix stab_projection(const HrLocalSpace& space,
                       StabWeight weight = StabWeight::InverseMu,
                       bool reduced = false);

/// dofi-dofi stabilization: (h_K^3 / mu) times the identity in dof space.
Matrix stab_dofi(const HrLocalSpace& space);

/// Stabilized local form A = Pi' G_D Pi + (I - Pi)' S (I - Pi).
Matrix local_a_matrix(const HrLocalSpace& space, const Matrix& stab);

}  // namespace hrvem
