// Displacement FEM surrogate for the virtual basis stresses on one
// element: Lagrange P_k spaces on the refined centroid fan, pure-Neumann
// elasticity solves with the rigid-motion kernel pinned by scalar
// constraints, and the exact-inner-product matrix B.

#pragma once

#include <hrvem/hrspace.hpp>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace hrvem {

struct FemConfig {
  int degree = 2;  // Lagrange degree k on the sub-triangulation
  int nref = 3;
  // Mesh grading exponent toward the polygon vertices (1 = uniform).
  // Grading trades interior for corner resolution; the defaults stay
  // uniform since the spectra are bulk-resolution limited.
  Scalar grading = 1.0;

  // Degree max(3, p+1): cubic at p = 1, else p+1. Quadratic surrogates
  // leave the extreme eigenvalues ~3-5% resolution-dependent at p = 1;
  // cubic ones are stable to three digits across refinement levels.
  static FemConfig for_order(int p, int nref = 3) {
    return FemConfig{std::max(3, p + 1), nref};
  }
};

enum class RmGauge { Volume, Boundary };

/// Conforming Lagrange P_k mesh on the centroid fan of a polygon: each
/// fan triangle carries a structured 2^nref x 2^nref collapsed grid whose
/// rows and columns are graded toward the polygon vertices. Boundary
/// edges keep the index of the parent polygon edge they lie on.
struct FemSpace {
  Polygon parent;
  FemConfig config;
  std::vector<Vector2> nodes;
  std::vector<std::array<int, 3>> tri_vertices;
  std::vector<std::array<int, 3>> tri_edge_tags;  // parent edge id or -1
  std::vector<std::vector<int>> connectivity;     // lattice-ordered node ids
  Matrix ref_nodal_coeffs;  // nodal shape functions in reference monomials

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_triangles() const { return static_cast<int>(tri_vertices.size()); }
  int nodes_per_cell() const { return poly_space_dim(config.degree); }
};

FemSpace make_fem_space(const Polygon& poly, FemConfig config);

/// Data of one local Neumann problem: the divergence (split into its
/// rigid-motion and RM-orthogonal parts in the bases of the owning
/// HrLocalSpace; the body force is its negative) and per-edge traction
/// polynomials in the edge bases.
struct LocalProblemData {
  Vector rm_coeffs;                     // 3
  Vector perp_coeffs;                   // num_interior_dofs
  std::vector<Vector> traction_coeffs;  // per edge, 2(p+1)
};

/// Face-type data: traction is the chosen edge basis member, zero on the
/// other edges; the rigid-motion divergence part restores compatibility.
LocalProblemData face_problem_data(const HrLocalSpace& space, int edge, int member);

/// Bulk-type data: body force is minus the chosen RM-orthogonal member,
/// zero traction.
LocalProblemData bulk_problem_data(const HrLocalSpace& space, int member);

/// Data of the virtual tensor with the given dofs (reconstructed
/// tractions and closed-form divergence).
LocalProblemData data_from_dofs(const HrLocalSpace& space, const Vector& dofs);

/// |int_K bodyforce . rho + int_dK traction . rho| over the rigid motions,
/// relative to the size of the two terms.
Scalar compatibility_residual(const HrLocalSpace& space, const LocalProblemData& data);

/// Factorized pure-Neumann solver for one element/material/fem config.
/// For lambda >= 1e3 the divergence part of the stiffness uses the
/// triangle-wise P_{k-1} projection of the divergence.
class LocalDisplacementSolver {
 public:
  LocalDisplacementSolver(const HrLocalSpace& space, FemConfig config,
                          RmGauge gauge = RmGauge::Volume);

  const FemSpace& fem() const { return fem_; }
  const HrLocalSpace& space() const { return *space_; }

  /// Galerkin solution (2 * num_nodes displacement coefficients).
  /// Rejects data with compatibility residual above 1e-8.
  Vector solve(const LocalProblemData& data) const;

  /// Solutions for every basis problem, face-type then bulk-type,
  /// ordered like the dofs of the space.
  const Matrix& basis_displacements() const;

  /// Energies (C grad_S z_j, grad_S z_i) for displacement columns.
  Matrix energy_matrix(const Matrix& z) const;

  /// Integral of |sigma(x) - C grad_S z(x)|^2 over the element.
  Scalar stress_error_sq(const Vector& z,
                         const std::function<Vector3(const Vector2&)>& sigma,
                         int quad_degree) const;

  /// Dof functionals evaluated on the surrogate stress C grad_S z, with
  /// tractions taken from the given data (they are imposed exactly) and
  /// interior moments from the broken divergence of the FEM stress.
  Vector surrogate_dofs(const Vector& z, const LocalProblemData& data) const;

 public:
  struct RefData;  // reference shape values at the volume quadrature points

 private:
  const HrLocalSpace* space_;
  FemSpace fem_;
  RmGauge gauge_;
  std::shared_ptr<const RefData> ref_;
  Eigen::SparseMatrix<Scalar> stiffness_;  // exact C-energy form
  Matrix constraints_;                     // gauge moments (2n x 3)
  std::array<int, 3> pinned_ = {0, 0, 0};  // dofs pinned for the factorization
  Scalar diag_scale_ = 1.0;
  Eigen::SparseMatrix<Scalar> pinned_matrix_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<Scalar>> factorization_;
  Matrix rm_nodal_;      // rigid motions in nodal coordinates (2n x 3)
  Matrix gauge_system_;  // constraints' * rm_nodal (3 x 3)
  mutable Matrix basis_displacements_;
  mutable bool basis_solved_ = false;

  Vector assemble_rhs(const LocalProblemData& data) const;
  Vector refined_solve(const Vector& rhs) const;
  Vector apply_gauge(const Vector& z) const;
};

struct ComplianceResult {
  Matrix matrix;       // B in dof coordinates
  Scalar min_eigenvalue = 0.0;
  bool refinement_needed = false;  // surfaced when B fails to be SPD
};

/// The matrix B_{ij} = (D phi_j, phi_i) of the dof-dual virtual basis,
/// assembled from the FEM displacements.
ComplianceResult compliance_matrix(const HrLocalSpace& space, FemConfig config,
                                   RmGauge gauge = RmGauge::Volume);

/// max_ij |DOF_i(phi_j^h) - delta_ij| over the surrogate dual basis.
Scalar unisolvence_defect(const HrLocalSpace& space, FemConfig config);

}  // namespace hrvem
