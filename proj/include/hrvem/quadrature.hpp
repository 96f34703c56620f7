// Quadrature over polygons and their edges.
//
// Element rules are conical-product triangle rules of the requested
// polynomial exactness, mapped over the centroid-fan sub-triangulation.
// Edge rules are Gauss-Legendre.

#pragma once

#include <hrvem/geometry.hpp>
#include <hrvem/types.hpp>

#include <vector>

namespace hrvem {

struct QuadratureRule {
  std::vector<Vector2> nodes;
  std::vector<Scalar> weights;
  int exactness = 0;

  int size() const { return static_cast<int>(nodes.size()); }
  Scalar total_weight() const {
    Scalar s = 0.0;
    for (Scalar w : weights) s += w;
    return s;
  }
};

/// Gauss-Legendre nodes/weights on [-1, 1], computed by Golub-Welsch.
void gauss_legendre(int n, std::vector<Scalar>& nodes, std::vector<Scalar>& weights);

/// Rule of the requested exactness on one triangle (conical product).
QuadratureRule triangle_quadrature(const Triangle& tri, int degree);

/// Rule of the requested exactness on a polygon, assembled over the
/// centroid fan. Degrees up to 30 are supported.
QuadratureRule element_quadrature(const Polygon& poly, int degree);

/// Gauss-Legendre rule with ceil((degree+1)/2) points on one edge.
QuadratureRule edge_quadrature(const Edge& edge, int degree);

/// Same rule on the segment [a, b].
QuadratureRule segment_quadrature(const Vector2& a, const Vector2& b, int degree);

}  // namespace hrvem
