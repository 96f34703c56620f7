#include <hrvem/polybasis.hpp>

#include <cmath>
#include <stdexcept>

namespace hrvem {

namespace {

ElementFrame frame_of(const Polygon& poly) {
  return ElementFrame{poly.centroid, poly.diameter};
}

// Sampling set for sup norms on an element: quadrature nodes plus 50
// uniform points per edge.
std::vector<Vector2> sup_sample_points(const Polygon& poly,
                                       const QuadratureRule& quad) {
  std::vector<Vector2> pts = quad.nodes;
  for (const Edge& e : poly.edges) {
    for (int i = 0; i < 50; ++i) {
      const Scalar t = static_cast<Scalar>(i) / 49.0;
      pts.push_back(e.start + t * (e.end - e.start));
    }
  }
  return pts;
}

Vector column_sup(const Matrix& values) {
  return values.cwiseAbs().colwise().maxCoeff().transpose();
}

Vector vector_column_sup(const Matrix& vx, const Matrix& vy) {
  return (vx.cwiseAbs2() + vy.cwiseAbs2()).cwiseSqrt().colwise().maxCoeff().transpose();
}

int quad_degree_for(int p) { return std::max(2 * p + 4, 2); }

}  // namespace

std::vector<Eigen::Vector2i> monomial_powers(int p) {
  std::vector<Eigen::Vector2i> powers;
  powers.reserve(poly_space_dim(p));
  for (int l = 0; l <= p; ++l) {
    for (int a = l; a >= 0; --a) powers.emplace_back(a, l - a);
  }
  return powers;
}

Matrix monomial_values(const ElementFrame& frame, int p,
                       const std::vector<Vector2>& points) {
  const int n = static_cast<int>(points.size());
  const int dim = poly_space_dim(p);
  Matrix xi_pow(n, p + 1), eta_pow(n, p + 1);
  for (int i = 0; i < n; ++i) {
    const Scalar xi = (points[i].x() - frame.center.x()) / frame.scale;
    const Scalar eta = (points[i].y() - frame.center.y()) / frame.scale;
    xi_pow(i, 0) = 1.0;
    eta_pow(i, 0) = 1.0;
    for (int k = 1; k <= p; ++k) {
      xi_pow(i, k) = xi_pow(i, k - 1) * xi;
      eta_pow(i, k) = eta_pow(i, k - 1) * eta;
    }
  }
  Matrix values(n, dim);
  const auto powers = monomial_powers(p);
  for (int j = 0; j < dim; ++j) {
    values.col(j) = xi_pow.col(powers[j][0]).cwiseProduct(eta_pow.col(powers[j][1]));
  }
  return values;
}

Matrix monomial_derivative(int p, Scalar scale, int axis) {
  const auto powers = monomial_powers(p);
  const auto lower = monomial_powers(p - 1);
  Matrix d = Matrix::Zero(poly_space_dim(p - 1), poly_space_dim(p));
  for (int j = 0; j < static_cast<int>(powers.size()); ++j) {
    Eigen::Vector2i target = powers[j];
    const int exponent = target[axis];
    if (exponent == 0) continue;
    target[axis] -= 1;
    for (int i = 0; i < static_cast<int>(lower.size()); ++i) {
      if (lower[i] == target) {
        d(i, j) = exponent / scale;
        break;
      }
    }
  }
  return d;
}

ScaledBasis scalar_monomials(const Polygon& poly, int p) {
  if (p < 0) throw std::invalid_argument("scalar_monomials: p must be >= 0");
  ScaledBasis basis;
  basis.kind = BasisKind::ScalarElement;
  basis.degree = p;
  basis.frame = frame_of(poly);
  const int dim = poly_space_dim(p);
  basis.coeffs = Matrix::Identity(dim, dim);

  const QuadratureRule quad = element_quadrature(poly, quad_degree_for(p));
  const auto pts = sup_sample_points(poly, quad);
  basis.sup_factors = column_sup(monomial_values(basis.frame, p, pts));
  for (int j = 0; j < dim; ++j) basis.coeffs(j, j) /= basis.sup_factors[j];
  return basis;
}

ScaledBasis vector_monomials(const Polygon& poly, int p) {
  const ScaledBasis scal = scalar_monomials(poly, p);
  const int dim = poly_space_dim(p);
  ScaledBasis basis;
  basis.kind = BasisKind::VectorElement;
  basis.degree = p;
  basis.frame = scal.frame;
  basis.coeffs = Matrix::Zero(2 * dim, 2 * dim);
  basis.sup_factors = Vector(2 * dim);
  // member 2*a + dir: scaled monomial a times unit vector e_dir
  for (int a = 0; a < dim; ++a) {
    for (int dir = 0; dir < 2; ++dir) {
      basis.coeffs.block(dir * dim, 2 * a + dir, dim, 1) = scal.coeffs.col(a);
      basis.sup_factors[2 * a + dir] = scal.sup_factors[a];
    }
  }
  return basis;
}

EdgeBasis edge_traction_basis(const Edge& edge, int p) {
  if (p < 0) throw std::invalid_argument("edge_traction_basis: p must be >= 0");
  EdgeBasis basis;
  basis.edge = edge;
  basis.degree = p;
  basis.scalar_coeffs = Matrix::Identity(p + 1, p + 1);
  basis.sup_factors = Vector(p + 1);
  for (int j = 0; j <= p; ++j) {
    Scalar sup = 0.0;
    for (int i = 0; i < 50; ++i) {
      const Scalar lambda = -0.5 + static_cast<Scalar>(i) / 49.0;
      sup = std::max(sup, std::abs(std::pow(lambda, j)));
    }
    basis.sup_factors[j] = sup;
    basis.scalar_coeffs(j, j) = 1.0 / sup;
  }
  return basis;
}

ScaledBasis rigid_motions(const Polygon& poly) {
  ScaledBasis basis;
  basis.kind = BasisKind::RigidBody;
  basis.degree = 1;
  basis.frame = frame_of(poly);
  const int dim = poly_space_dim(1);
  basis.coeffs = Matrix::Zero(2 * dim, 3);
  basis.coeffs(0, 0) = 1.0;        // (1, 0)
  basis.coeffs(dim, 1) = 1.0;      // (0, 1)
  basis.coeffs(2, 2) = -1.0;       // (-eta, xi) up to normalization
  basis.coeffs(dim + 1, 2) = 1.0;

  const QuadratureRule quad = element_quadrature(poly, 2);
  const auto pts = sup_sample_points(poly, quad);
  const Matrix values = monomial_values(basis.frame, 1, pts);
  Matrix vx = values * basis.coeffs.topRows(dim);
  Matrix vy = values * basis.coeffs.bottomRows(dim);
  basis.sup_factors = vector_column_sup(vx, vy);
  for (int j = 0; j < 3; ++j) basis.coeffs.col(j) /= basis.sup_factors[j];
  return basis;
}

ScaledBasis rm_orthogonal_basis(const Polygon& poly, int p) {
  ScaledBasis basis;
  basis.kind = BasisKind::RmOrthogonal;
  basis.degree = p;
  basis.frame = frame_of(poly);
  const int dim = poly_space_dim(p);
  if (p < 1) {
    basis.coeffs = Matrix::Zero(2 * std::max(dim, 1), 0);
    basis.sup_factors = Vector(0);
    return basis;
  }

  const QuadratureRule quad = element_quadrature(poly, quad_degree_for(p));
  const int nq = quad.size();
  Vector w(nq);
  for (int q = 0; q < nq; ++q) w[q] = quad.weights[q];
  const Matrix values = monomial_values(basis.frame, p, quad.nodes);

  // L2-orthonormalize the rigid motions first; candidates are then
  // orthogonalized against the whole accepted set.
  const ScaledBasis rm = rigid_motions(poly);
  Matrix accepted = Matrix::Zero(2 * dim, 2 * dim);
  Matrix acc_x(nq, accepted.cols()), acc_y(nq, accepted.cols());
  int n_acc = 0;
  const int dim1 = poly_space_dim(1);
  for (int j = 0; j < 3; ++j) {
    Vector col = Vector::Zero(2 * dim);
    col.segment(0, dim1) = rm.coeffs.col(j).head(dim1);
    col.segment(dim, dim1) = rm.coeffs.col(j).tail(dim1);
    Vector cx = values * col.head(dim);
    Vector cy = values * col.tail(dim);
    for (int i = 0; i < n_acc; ++i) {
      const Scalar proj = (w.array() * (cx.array() * acc_x.col(i).array() +
                                        cy.array() * acc_y.col(i).array()))
                              .sum();
      col -= proj * accepted.col(i);
      cx -= proj * acc_x.col(i);
      cy -= proj * acc_y.col(i);
    }
    const Scalar norm = std::sqrt(
        (w.array() * (cx.array().square() + cy.array().square())).sum());
    accepted.col(n_acc) = col / norm;
    acc_x.col(n_acc) = cx / norm;
    acc_y.col(n_acc) = cy / norm;
    ++n_acc;
  }

  // Candidates: vector monomials in member order, orthogonalized against
  // everything accepted so far (one reorthogonalization pass).
  const ScaledBasis vmono = vector_monomials(poly, p);
  Matrix kept_coeffs = Matrix::Zero(2 * dim, 2 * dim);
  int n_kept = 0;
  for (int c = 0; c < vmono.num_members(); ++c) {
    Vector col = vmono.coeffs.col(c);
    Vector cx = values * col.head(dim);
    Vector cy = values * col.tail(dim);
    const Scalar norm0 = std::sqrt(
        (w.array() * (cx.array().square() + cy.array().square())).sum());
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < n_acc; ++i) {
        const Scalar proj =
            (w.array() * (cx.array() * acc_x.col(i).array() +
                          cy.array() * acc_y.col(i).array()))
                .sum();
        col -= proj * accepted.col(i);
        cx -= proj * acc_x.col(i);
        cy -= proj * acc_y.col(i);
      }
    }
    const Scalar norm = std::sqrt(
        (w.array() * (cx.array().square() + cy.array().square())).sum());
    if (norm <= 1e-10 * norm0) continue;  // direction already spanned
    accepted.col(n_acc) = col / norm;
    acc_x.col(n_acc) = cx / norm;
    acc_y.col(n_acc) = cy / norm;
    kept_coeffs.col(n_kept) = accepted.col(n_acc);
    ++n_acc;
    ++n_kept;
  }
  if (n_kept != 2 * dim - 3) {
    throw std::runtime_error("rm_orthogonal_basis: unexpected dimension");
  }

  basis.coeffs = kept_coeffs.leftCols(n_kept);
  // Sup-renormalize.
  const auto pts = sup_sample_points(poly, quad);
  const Matrix pv = monomial_values(basis.frame, p, pts);
  Matrix vx = pv * basis.coeffs.topRows(dim);
  Matrix vy = pv * basis.coeffs.bottomRows(dim);
  basis.sup_factors = vector_column_sup(vx, vy);
  for (int j = 0; j < n_kept; ++j) basis.coeffs.col(j) /= basis.sup_factors[j];
  return basis;
}

StressBasis polynomial_stress_basis(const Polygon& poly, int p, const Material& mat) {
  if (p < 0) throw std::invalid_argument("polynomial_stress_basis: p must be >= 0");
  StressBasis basis;
  basis.degree = p;
  basis.frame = frame_of(poly);
  basis.potentials = rm_orthogonal_basis(poly, p + 1);

  const int dim_hi = poly_space_dim(p + 1);
  const int dim = poly_space_dim(p);
  const int m = basis.potentials.num_members();
  const Matrix dx = monomial_derivative(p + 1, basis.frame.scale, 0);
  const Matrix dy = monomial_derivative(p + 1, basis.frame.scale, 1);
  const Matrix3 c3 = mat.stiffness_matrix();

  basis.grad_coeffs = Matrix::Zero(3 * dim, m);
  basis.coeffs = Matrix::Zero(3 * dim, m);
  for (int j = 0; j < m; ++j) {
    const Vector qx = basis.potentials.coeffs.col(j).head(dim_hi);
    const Vector qy = basis.potentials.coeffs.col(j).tail(dim_hi);
    const Vector g11 = dx * qx;
    const Vector g22 = dy * qy;
    const Vector g12s = (dy * qx + dx * qy) / kSqrt2;
    basis.grad_coeffs.col(j).segment(0, dim) = g11;
    basis.grad_coeffs.col(j).segment(dim, dim) = g22;
    basis.grad_coeffs.col(j).segment(2 * dim, dim) = g12s;
    // Apply the constant stiffness in packed coordinates.
    basis.coeffs.col(j).segment(0, dim) = c3(0, 0) * g11 + c3(0, 1) * g22;
    basis.coeffs.col(j).segment(dim, dim) = c3(1, 0) * g11 + c3(1, 1) * g22;
    basis.coeffs.col(j).segment(2 * dim, dim) = c3(2, 2) * g12s;
  }

  const QuadratureRule quad = element_quadrature(poly, quad_degree_for(p));
  const auto pts = sup_sample_points(poly, quad);
  const Matrix pv = monomial_values(basis.frame, p, pts);
  const Matrix t11 = pv * basis.coeffs.middleRows(0, dim);
  const Matrix t22 = pv * basis.coeffs.middleRows(dim, dim);
  const Matrix t12s = pv * basis.coeffs.middleRows(2 * dim, dim);
  basis.sup_factors =
      (t11.cwiseAbs2() + t22.cwiseAbs2() + t12s.cwiseAbs2())
          .cwiseSqrt()
          .colwise()
          .maxCoeff()
          .transpose();
  for (int j = 0; j < m; ++j) basis.coeffs.col(j) /= basis.sup_factors[j];
  return basis;
}

Matrix eval_scalar(const ScaledBasis& basis, const std::vector<Vector2>& points) {
  return monomial_values(basis.frame, basis.degree, points) * basis.coeffs;
}

void eval_vector(const ScaledBasis& basis, const std::vector<Vector2>& points,
                 Matrix& vx, Matrix& vy) {
  const int dim = poly_space_dim(basis.degree);
  const Matrix values = monomial_values(basis.frame, basis.degree, points);
  vx = values * basis.coeffs.topRows(dim);
  vy = values * basis.coeffs.bottomRows(dim);
}

void eval_tensor(const StressBasis& basis, const std::vector<Vector2>& points,
                 Matrix& t11, Matrix& t22, Matrix& t12s) {
  const int dim = poly_space_dim(basis.degree);
  const Matrix values = monomial_values(basis.frame, basis.degree, points);
  t11 = values * basis.coeffs.middleRows(0, dim);
  t22 = values * basis.coeffs.middleRows(dim, dim);
  t12s = values * basis.coeffs.middleRows(2 * dim, dim);
}

Matrix eval_edge_scalar(const EdgeBasis& basis, const std::vector<Vector2>& points) {
  const int n = static_cast<int>(points.size());
  const Vector2 tangent = (basis.edge.end - basis.edge.start) / basis.edge.length;
  Matrix values(n, basis.degree + 1);
  for (int i = 0; i < n; ++i) {
    const Scalar lambda = (points[i] - basis.edge.midpoint).dot(tangent) /
                          basis.edge.length;
    Scalar pw = 1.0;
    for (int j = 0; j <= basis.degree; ++j) {
      values(i, j) = pw;
      pw *= lambda;
    }
  }
  return values * basis.scalar_coeffs;
}

Matrix scalar_gram(const ScaledBasis& basis, const QuadratureRule& quad) {
  const Matrix values = eval_scalar(basis, quad.nodes);
  Vector w = Eigen::Map<const Vector>(quad.weights.data(), quad.size());
  return values.transpose() * w.asDiagonal() * values;
}

Matrix vector_gram(const ScaledBasis& basis, const QuadratureRule& quad) {
  Matrix vx, vy;
  eval_vector(basis, quad.nodes, vx, vy);
  Vector w = Eigen::Map<const Vector>(quad.weights.data(), quad.size());
  return vx.transpose() * w.asDiagonal() * vx + vy.transpose() * w.asDiagonal() * vy;
}

Matrix vector_cross_gram(const ScaledBasis& a, const ScaledBasis& b,
                         const QuadratureRule& quad) {
  Matrix ax, ay, bx, by;
  eval_vector(a, quad.nodes, ax, ay);
  eval_vector(b, quad.nodes, bx, by);
  Vector w = Eigen::Map<const Vector>(quad.weights.data(), quad.size());
  return ax.transpose() * w.asDiagonal() * bx + ay.transpose() * w.asDiagonal() * by;
}

Matrix edge_gram(const EdgeBasis& basis) {
  const QuadratureRule quad =
      edge_quadrature(basis.edge, 2 * basis.degree + 2);
  const Matrix values = eval_edge_scalar(basis, quad.nodes);
  Vector w = Eigen::Map<const Vector>(quad.weights.data(), quad.size());
  const Matrix g = values.transpose() * w.asDiagonal() * values;
  const int n = basis.degree + 1;
  Matrix full = Matrix::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      full(2 * j, 2 * k) = g(j, k);
      full(2 * j + 1, 2 * k + 1) = g(j, k);
    }
  }
  return full;
}

}  // namespace hrvem
