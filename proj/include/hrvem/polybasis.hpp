// Scaled monomial bases on elements and edges, rigid body motions and
// their L2-orthogonal complements, and the polynomial stress space
// C grad_S(P_{p+1}) used by the consistency projector.
//
// Polynomial fields are stored as coefficient columns with respect to the
// raw shifted/scaled monomials xi^a eta^b, xi = (x - center)/scale.
// Vector fields stack the two component coefficient blocks; packed
// symmetric tensor fields stack three blocks in (t11, t22, sqrt2*t12)
// coordinates.

#pragma once

#include <hrvem/elasticity.hpp>
#include <hrvem/geometry.hpp>
#include <hrvem/quadrature.hpp>
#include <hrvem/types.hpp>

#include <vector>

namespace hrvem {

struct ElementFrame {
  Vector2 center = Vector2::Zero();
  Scalar scale = 1.0;
};

/// dim P_p in two variables.
inline int poly_space_dim(int p) { return p < 0 ? 0 : (p + 1) * (p + 2) / 2; }

/// Exponent pairs (a, b) in graded order, a descending within each degree.
std::vector<Eigen::Vector2i> monomial_powers(int p);

/// Values of all monomials up to degree p at the given points (n x dim).
Matrix monomial_values(const ElementFrame& frame, int p,
                       const std::vector<Vector2>& points);

/// Coefficient map of d/dx (axis 0) or d/dy (axis 1): dim P_{p-1} x dim P_p.
Matrix monomial_derivative(int p, Scalar scale, int axis);

enum class BasisKind {
  ScalarElement,
  VectorElement,
  RigidBody,
  RmOrthogonal,
};

/// Family of sup-normalized polynomial fields on an element.
struct ScaledBasis {
  BasisKind kind = BasisKind::ScalarElement;
  int degree = 0;
  ElementFrame frame;
  Matrix coeffs;       // scalar: dim x m, vector: 2*dim x m
  Vector sup_factors;  // sampled sup norms before normalization

  int num_members() const { return static_cast<int>(coeffs.cols()); }
};

/// Traction basis on one edge: members are Cartesian unit vectors times
/// normalized powers of lambda = (s - s_mid)/h_e. Member index
/// m = 2*j + dir for power j and direction dir.
struct EdgeBasis {
  Edge edge;
  int degree = 0;
  Matrix scalar_coeffs;  // (p+1) x (p+1), column j = normalized lambda^j
  Vector sup_factors;

  int num_members() const { return 2 * (degree + 1); }
};

/// Polynomial stresses C grad_S(q), q ranging over a basis of vector
/// P_{p+1} modulo rigid motions. `coeffs` holds the sup-normalized packed
/// tensors (3*dim P_p x m); `grad_coeffs` the un-normalized grad_S(q).
struct StressBasis {
  int degree = 0;  // tensor entries live in P_degree
  ElementFrame frame;
  ScaledBasis potentials;  // RM-orthogonal basis of vector P_{p+1}
  Matrix coeffs;
  Matrix grad_coeffs;
  Vector sup_factors;

  int num_members() const { return static_cast<int>(coeffs.cols()); }
};

ScaledBasis scalar_monomials(const Polygon& poly, int p);
ScaledBasis vector_monomials(const Polygon& poly, int p);
EdgeBasis edge_traction_basis(const Edge& edge, int p);
ScaledBasis rigid_motions(const Polygon& poly);

/// L2(K)-Gram-Schmidt of the vector monomials against the rigid motions
/// (classical, one reorthogonalization pass), sup-renormalized. Dimension
/// (p+1)(p+2) - 3 for p >= 1; empty for p = 0.
ScaledBasis rm_orthogonal_basis(const Polygon& poly, int p);

StressBasis polynomial_stress_basis(const Polygon& poly, int p, const Material& mat);

/// Member values at points: scalar (n x m) or per-component matrices.
Matrix eval_scalar(const ScaledBasis& basis, const std::vector<Vector2>& points);
void eval_vector(const ScaledBasis& basis, const std::vector<Vector2>& points,
                 Matrix& vx, Matrix& vy);
void eval_tensor(const StressBasis& basis, const std::vector<Vector2>& points,
                 Matrix& t11, Matrix& t22, Matrix& t12s);

/// Values of the scalar edge polynomials at points on the edge (n x (p+1)).
Matrix eval_edge_scalar(const EdgeBasis& basis, const std::vector<Vector2>& points);

/// L2 Gram matrices by quadrature.
Matrix scalar_gram(const ScaledBasis& basis, const QuadratureRule& quad);
Matrix vector_gram(const ScaledBasis& basis, const QuadratureRule& quad);
Matrix vector_cross_gram(const ScaledBasis& a, const ScaledBasis& b,
                         const QuadratureRule& quad);
/// Full 2(p+1) Gram of the vector edge basis (block diagonal over the
/// two Cartesian directions).
Matrix edge_gram(const EdgeBasis& basis);

}  // namespace hrvem
