#include <hrvem/quadrature.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace hrvem {

namespace {

// Nodes and weights of the n-point Gauss rule for the weight function
// implied by the symmetric Jacobi recurrence (alpha_k diagonal, beta_k
// off-diagonal, mu0 the weight's total mass). Golub-Welsch.
void golub_welsch(const Vector& alpha, const Vector& beta, Scalar mu0,
                  std::vector<Scalar>& nodes, std::vector<Scalar>& weights) {
  const int n = static_cast<int>(alpha.size());
  Matrix jacobi = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    jacobi(i, i) = alpha[i];
    if (i + 1 < n) {
      jacobi(i, i + 1) = beta[i + 1];
      jacobi(i + 1, i) = beta[i + 1];
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()[i];
    const Scalar v0 = es.eigenvectors()(0, i);
    weights[i] = mu0 * v0 * v0;
  }
}

// Gauss-Jacobi rule on [-1, 1] for the weight (1 - x).
void gauss_jacobi10(int n, std::vector<Scalar>& nodes, std::vector<Scalar>& weights) {
  Vector alpha(n), beta(n);
  alpha[0] = -1.0 / 3.0;
  beta[0] = 0.0;
  for (int k = 1; k < n; ++k) {
    alpha[k] = -1.0 / ((2.0 * k + 1.0) * (2.0 * k + 3.0));
    beta[k] = std::sqrt(k * (k + 1.0)) / (2.0 * k + 1.0);
  }
  golub_welsch(alpha, beta, 2.0, nodes, weights);
}

int points_for_degree(int degree) { return (degree + 2) / 2; }

}  // namespace

void gauss_legendre(int n, std::vector<Scalar>& nodes, std::vector<Scalar>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  Vector alpha = Vector::Zero(n), beta = Vector::Zero(n);
  for (int k = 1; k < n; ++k) {
    beta[k] = k / std::sqrt(4.0 * k * k - 1.0);
  }
  golub_welsch(alpha, beta, 2.0, nodes, weights);
}

QuadratureRule triangle_quadrature(const Triangle& tri, int degree) {
  if (degree < 0 || degree > 40) {
    throw std::invalid_argument("triangle_quadrature: unsupported degree");
  }
  const int n = points_for_degree(degree);
  std::vector<Scalar> xj, wj, xl, wl;
  gauss_jacobi10(n, xj, wj);
  gauss_legendre(n, xl, wl);

  // Reference-triangle integral as an iterated integral with the (1-u)
  // cone weight absorbed by the Jacobi rule.
  QuadratureRule rule;
  rule.exactness = degree;
  rule.nodes.reserve(n * n);
  rule.weights.reserve(n * n);
  const Scalar jac = 2.0 * tri.area();
  for (int i = 0; i < n; ++i) {
    const Scalar u = 0.5 * (1.0 + xj[i]);
    for (int j = 0; j < n; ++j) {
      const Scalar v = (1.0 - u) * 0.5 * (1.0 + xl[j]);
      rule.nodes.push_back(tri.a + u * (tri.b - tri.a) + v * (tri.c - tri.a));
      rule.weights.push_back(jac * wj[i] * wl[j] / 8.0);
    }
  }
  return rule;
}

QuadratureRule element_quadrature(const Polygon& poly, int degree) {
  if (degree < 0 || degree > 30) {
    throw std::invalid_argument("element_quadrature: unsupported degree");
  }
  const SubTriangulation fan = subtriangulate(poly, 0);
  QuadratureRule rule;
  rule.exactness = degree;
  for (const Triangle& tri : fan.triangles) {
    const QuadratureRule local = triangle_quadrature(tri, degree);
    rule.nodes.insert(rule.nodes.end(), local.nodes.begin(), local.nodes.end());
    rule.weights.insert(rule.weights.end(), local.weights.begin(),
                        local.weights.end());
  }
  return rule;
}

QuadratureRule segment_quadrature(const Vector2& a, const Vector2& b, int degree) {
  if (degree < 0) throw std::invalid_argument("segment_quadrature: bad degree");
  const int n = points_for_degree(degree);
  std::vector<Scalar> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule rule;
  rule.exactness = degree;
  rule.nodes.reserve(n);
  rule.weights.reserve(n);
  const Scalar half_len = 0.5 * (b - a).norm();
  for (int i = 0; i < n; ++i) {
    rule.nodes.push_back(a + 0.5 * (1.0 + x[i]) * (b - a));
    rule.weights.push_back(half_len * w[i]);
  }
  return rule;
}

QuadratureRule edge_quadrature(const Edge& edge, int degree) {
  return segment_quadrature(edge.start, edge.end, degree);
}

}  // namespace hrvem
