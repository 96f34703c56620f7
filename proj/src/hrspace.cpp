#include <hrvem/hrspace.hpp>

#include <Eigen/Eigenvalues>

#include <cstdlib>
#include <iostream>
#include <stdexcept>

namespace hrvem {

namespace {

bool debug_log_enabled() {
  const char* env = std::getenv("HRVEM_LOG");
  return env != nullptr && std::string(env) == "debug";
}

Vector map_weights(const QuadratureRule& quad) {
  return Eigen::Map<const Vector>(quad.weights.data(), quad.size());
}

}  // namespace

HrLocalSpace::HrLocalSpace(const Polygon& polygon, int degree,
                           const Material& material)
    : polygon_(polygon), degree_(degree), material_(material) {
  if (degree < 1) {
    throw std::invalid_argument("HrLocalSpace: degree must be >= 1");
  }
  const int p = degree;
  const int n_edges = polygon_.num_edges();
  const int per_edge = 2 * (p + 1);

  quad_ = element_quadrature(polygon_, 2 * p + 4);
  rm_ = rigid_motions(polygon_);
  rm_perp_ = rm_orthogonal_basis(polygon_, p);
  stress_ = polynomial_stress_basis(polygon_, p, material_);

  edge_bases_.reserve(n_edges);
  edge_mass_.reserve(n_edges);
  for (int e = 0; e < n_edges; ++e) {
    edge_bases_.push_back(edge_traction_basis(polygon_.edges[e], p));
    edge_mass_.push_back(edge_gram(edge_bases_.back()));
  }

  const int n_int = rm_perp_.num_members();
  const int n_dofs = n_edges * per_edge + n_int;
  dofs_.reserve(n_dofs);
  for (int e = 0; e < n_edges; ++e) {
    for (int m = 0; m < per_edge; ++m) {
      dofs_.push_back({DofDescriptor::Kind::EdgeTraction, e, m,
                       static_cast<int>(dofs_.size())});
    }
  }
  for (int m = 0; m < n_int; ++m) {
    dofs_.push_back({DofDescriptor::Kind::InteriorDivergence, -1, m,
                     static_cast<int>(dofs_.size())});
  }

  // Per-edge traction reconstruction: M_e c = h_e dof_e.
  traction_maps_.reserve(n_edges);
  for (int e = 0; e < n_edges; ++e) {
    Matrix map = Matrix::Zero(per_edge, n_dofs);
    map.middleCols(edge_dof_offset(e), per_edge) =
        polygon_.edges[e].length *
        edge_mass_[e].ldlt().solve(Matrix::Identity(per_edge, per_edge));
    traction_maps_.push_back(std::move(map));
  }

  rm_gram_ = vector_gram(rm_, quad_);
  perp_mass_ = n_int > 0 ? vector_gram(rm_perp_, quad_) : Matrix::Zero(0, 0);

  // RM-orthogonal divergence part, read from the interior dofs with the
  // h_K/|K| moment weight.
  div_perp_map_ = Matrix::Zero(n_int, n_dofs);
  if (n_int > 0) {
    div_perp_map_.middleCols(interior_dof_offset(), n_int) =
        (polygon_.area / polygon_.diameter) *
        perp_mass_.ldlt().solve(Matrix::Identity(n_int, n_int));
  }

  // Rigid-motion divergence part via the divergence theorem:
  // (r, rho)_K = sum_e int_e (tau n) . rho.
  Matrix rm_rhs = Matrix::Zero(3, n_dofs);
  for (int e = 0; e < n_edges; ++e) {
    const QuadratureRule equad = edge_quadrature(polygon_.edges[e], p + 3);
    const Matrix scal = eval_edge_scalar(edge_bases_[e], equad.nodes);
    Matrix rx, ry;
    eval_vector(rm_, equad.nodes, rx, ry);
    const Vector w = map_weights(equad);
    // t[a, member (j,dir)] = int_e scalar_j * rho_a[dir]
    Matrix t = Matrix::Zero(3, per_edge);
    for (int j = 0; j <= p; ++j) {
      for (int a = 0; a < 3; ++a) {
        t(a, 2 * j) = (w.array() * scal.col(j).array() * rx.col(a).array()).sum();
        t(a, 2 * j + 1) = (w.array() * scal.col(j).array() * ry.col(a).array()).sum();
      }
    }
    rm_rhs += t * traction_maps_[e];
  }
  div_rm_map_ = rm_gram_.ldlt().solve(rm_rhs);

  // Dof functionals on the polynomial stress basis.
  const int m_t = stress_.num_members();
  stress_dofs_ = Matrix::Zero(n_dofs, m_t);
  for (int b = 0; b < m_t; ++b) {
    stress_dofs_.col(b) = polynomial_stress_dofs(*this, stress_.coeffs.col(b));
  }

  // Projector system on the RM-complement potential basis:
  // (C grad_S w_b, grad_S w_b') fed by the closed-form divergence and the
  // reconstructed tractions after integration by parts.
  const int dim_lo = poly_space_dim(p);
  const Vector w = map_weights(quad_);
  const Matrix mono = monomial_values(stress_.frame, p, quad_.nodes);
  const Matrix g11 = mono * stress_.grad_coeffs.middleRows(0, dim_lo);
  const Matrix g22 = mono * stress_.grad_coeffs.middleRows(dim_lo, dim_lo);
  const Matrix g12s = mono * stress_.grad_coeffs.middleRows(2 * dim_lo, dim_lo);
  const Matrix3 c3 = material_.stiffness_matrix();
  const Matrix cg11 = c3(0, 0) * g11 + c3(0, 1) * g22;
  const Matrix cg22 = c3(1, 0) * g11 + c3(1, 1) * g22;
  const Matrix cg12s = c3(2, 2) * g12s;
  const Matrix k_t = g11.transpose() * w.asDiagonal() * cg11 +
                     g22.transpose() * w.asDiagonal() * cg22 +
                     g12s.transpose() * w.asDiagonal() * cg12s;

  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(k_t);
    projector_condition_ =
        es.eigenvalues().maxCoeff() / std::max(es.eigenvalues().minCoeff(), 1e-300);
    if (projector_condition_ > 1e12 && debug_log_enabled()) {
      std::cerr << "hrvem: projector system condition " << projector_condition_
                << " on element with " << n_edges << " edges, p = " << p << "\n";
    }
  }

  // Cross Grams of the potentials against the divergence representation.
  const Matrix cross_rm = vector_cross_gram(rm_, stress_.potentials, quad_);
  Matrix cross_perp = Matrix::Zero(n_int, stress_.potentials.num_members());
  if (n_int > 0) cross_perp = vector_cross_gram(rm_perp_, stress_.potentials, quad_);

  Matrix rhs = -(cross_rm.transpose() * div_rm_map_ +
                 cross_perp.transpose() * div_perp_map_);
  for (int e = 0; e < n_edges; ++e) {
    const QuadratureRule equad = edge_quadrature(polygon_.edges[e], 2 * p + 3);
    const Matrix scal = eval_edge_scalar(edge_bases_[e], equad.nodes);
    Matrix wx, wy;
    eval_vector(stress_.potentials, equad.nodes, wx, wy);
    const Vector ew = map_weights(equad);
    Matrix t = Matrix::Zero(per_edge, m_t);
    for (int j = 0; j <= p; ++j) {
      for (int b = 0; b < m_t; ++b) {
        t(2 * j, b) = (ew.array() * scal.col(j).array() * wx.col(b).array()).sum();
        t(2 * j + 1, b) = (ew.array() * scal.col(j).array() * wy.col(b).array()).sum();
      }
    }
    rhs += t.transpose() * traction_maps_[e];
  }

  const Matrix coeffs_unnormalized = k_t.ldlt().solve(rhs);
  projector_coeffs_ = stress_.sup_factors.asDiagonal() * coeffs_unnormalized;

  // Compliance Gram of the normalized members: D(C grad w) = grad w, so
  // G_D is K_T rescaled by the normalization factors.
  stress_gram_d_ = k_t;
  for (int a = 0; a < m_t; ++a) {
    for (int b = 0; b < m_t; ++b) {
      stress_gram_d_(a, b) /= stress_.sup_factors[a] * stress_.sup_factors[b];
    }
  }
}

Vector polynomial_stress_dofs(const HrLocalSpace& space, const Vector& tensor_coeffs) {
  const int p = space.degree();
  const int dim = poly_space_dim(p);
  if (tensor_coeffs.size() != 3 * dim) {
    throw std::invalid_argument("polynomial_stress_dofs: bad coefficient size");
  }
  const Polygon& poly = space.polygon();
  Vector dofs = Vector::Zero(space.num_dofs());
  const ElementFrame frame = space.stress_basis().frame;

  // Edge moments of the traction.
  for (int e = 0; e < poly.num_edges(); ++e) {
    const Edge& edge = poly.edges[e];
    const QuadratureRule equad = edge_quadrature(edge, 2 * p + 3);
    const Matrix mono = monomial_values(frame, p, equad.nodes);
    const Vector t11 = mono * tensor_coeffs.segment(0, dim);
    const Vector t22 = mono * tensor_coeffs.segment(dim, dim);
    const Vector t12 = mono * tensor_coeffs.segment(2 * dim, dim) / kSqrt2;
    const Matrix scal = eval_edge_scalar(space.edge_basis(e), equad.nodes);
    const Vector w = map_weights(equad);
    const Vector tn_x = t11 * edge.normal.x() + t12 * edge.normal.y();
    const Vector tn_y = t12 * edge.normal.x() + t22 * edge.normal.y();
    for (int j = 0; j <= p; ++j) {
      dofs[space.edge_dof_offset(e) + 2 * j] =
          (w.array() * scal.col(j).array() * tn_x.array()).sum() / edge.length;
      dofs[space.edge_dof_offset(e) + 2 * j + 1] =
          (w.array() * scal.col(j).array() * tn_y.array()).sum() / edge.length;
    }
  }

  // Interior moments of the divergence.
  if (space.num_interior_dofs() > 0) {
    const Matrix dx = monomial_derivative(p, frame.scale, 0);
    const Matrix dy = monomial_derivative(p, frame.scale, 1);
    const Vector c11 = tensor_coeffs.segment(0, dim);
    const Vector c22 = tensor_coeffs.segment(dim, dim);
    const Vector c12 = tensor_coeffs.segment(2 * dim, dim) / kSqrt2;
    const Vector div_x = dx * c11 + dy * c12;
    const Vector div_y = dx * c12 + dy * c22;
    const QuadratureRule& quad = space.quad();
    const Matrix mono_lo = monomial_values(frame, p - 1, quad.nodes);
    const Vector w = map_weights(quad);
    Matrix px, py;
    eval_vector(space.rm_perp(), quad.nodes, px, py);
    const Vector dvx = mono_lo * div_x;
    const Vector dvy = mono_lo * div_y;
    const Scalar moment_weight = poly.diameter / poly.area;
    for (int i = 0; i < space.num_interior_dofs(); ++i) {
      dofs[space.interior_dof_offset() + i] =
          moment_weight * (w.array() * (px.col(i).array() * dvx.array() +
                                        py.col(i).array() * dvy.array()))
                              .sum();
    }
  }
  return dofs;
}

Matrix traction_values(const HrLocalSpace& space, const Vector& dofs, int e,
                       const std::vector<Vector2>& points) {
  const int p = space.degree();
  const Vector coeffs = space.traction_map(e) * dofs;
  const Matrix scal = eval_edge_scalar(space.edge_basis(e), points);
  Matrix out = Matrix::Zero(static_cast<int>(points.size()), 2);
  for (int j = 0; j <= p; ++j) {
    out.col(0) += coeffs[2 * j] * scal.col(j);
    out.col(1) += coeffs[2 * j + 1] * scal.col(j);
  }
  return out;
}

Matrix divergence_values(const HrLocalSpace& space, const Vector& dofs,
                         const std::vector<Vector2>& points) {
  const Vector rm_coeffs = space.div_rm_map() * dofs;
  Matrix rx, ry;
  eval_vector(space.rm(), points, rx, ry);
  Matrix out(static_cast<int>(points.size()), 2);
  out.col(0) = rx * rm_coeffs;
  out.col(1) = ry * rm_coeffs;
  if (space.num_interior_dofs() > 0) {
    const Vector perp_coeffs = space.div_perp_map() * dofs;
    Matrix px, py;
    eval_vector(space.rm_perp(), points, px, py);
    out.col(0) += px * perp_coeffs;
    out.col(1) += py * perp_coeffs;
  }
  return out;
}

Matrix stab_projection(const HrLocalSpace& space, StabWeight weight, bool reduced) {
  const Polygon& poly = space.polygon();
  const Scalar w = weight == StabWeight::InverseMu
                       ? 1.0 / space.material().mu
                       : space.material().compliance_trace();
  // Two-dimensional weights |K|/h_e and |K| on the traction and divergence
  // terms; both terms scale like the local L2 norm of the stress.
  Matrix s = Matrix::Zero(space.num_dofs(), space.num_dofs());
  for (int e = 0; e < poly.num_edges(); ++e) {
    const Matrix& map = space.traction_map(e);
    s += (poly.area / poly.edges[e].length) * map.transpose() *
         space.edge_mass(e) * map;
  }
  if (!reduced && space.num_interior_dofs() > 0) {
    const Matrix& map = space.div_perp_map();
    s += poly.area * map.transpose() * space.perp_mass() * map;
  }
  s *= w;
  return 0.5 * (s + s.transpose());
}

Matrix stab_dofi(const HrLocalSpace& space) {
  const Scalar h = space.polygon().diameter;
  return (h * h * h / space.material().mu) *
         Matrix::Identity(space.num_dofs(), space.num_dofs());
}

Matrix local_a_matrix(const HrLocalSpace& space, const Matrix& stab) {
  const Matrix& pi_c = space.projector_coeffs();
  const Matrix complement =
      Matrix::Identity(space.num_dofs(), space.num_dofs()) - space.projector_dofs();
  Matrix a = pi_c.transpose() * space.stress_compliance_gram() * pi_c +
             complement.transpose() * stab * complement;
  return 0.5 * (a + a.transpose());
}

}  // namespace hrvem
