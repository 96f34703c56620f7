// Polygonal elements, derived geometric quantities, centroid-fan
// sub-triangulation, and the generators for the badly-shaped element
// sequences used in the spectral studies.

#pragma once

#include <hrvem/types.hpp>

#include <iosfwd>
#include <vector>

namespace hrvem {

struct Edge {
  Vector2 start;
  Vector2 end;
  Vector2 normal;    // unit outward normal
  Vector2 midpoint;
  Scalar length = 0.0;
};

/// Simple counterclockwise polygon with cached derived quantities.
struct Polygon {
  std::vector<Vector2> vertices;
  std::vector<Edge> edges;
  Vector2 centroid = Vector2::Zero();
  Scalar area = 0.0;
  Scalar diameter = 0.0;

  int num_edges() const { return static_cast<int>(edges.size()); }
};

struct Triangle {
  Vector2 a, b, c;
  Scalar area() const {
    return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
  }
};

struct SubTriangulation {
  std::vector<Triangle> triangles;
  int refinement_level = 0;
};

/// Builds a polygon from counterclockwise vertices; centroid and area come
/// from the shoelace formulas, the diameter is the max pairwise vertex
/// distance. Throws std::invalid_argument on fewer than 3 vertices or
/// non-positive signed area.
Polygon polygon_from_vertices(const std::vector<Vector2>& vertices);

/// True if every centroid-fan triangle is strictly positively oriented,
/// i.e. the polygon is star-shaped with respect to its centroid.
bool star_shaped_wrt_centroid(const Polygon& poly);

/// Centroid-fan triangulation followed by `nref` uniform quadrisection
/// passes; triangle count is n_edges * 4^nref. Rejects polygons that are
/// not star-shaped with respect to their centroid.
SubTriangulation subtriangulate(const Polygon& poly, int nref);

/// Nonconvex hourglass hexagon; the gap between the two re-entrant
/// vertices is 0.5 * 2^-k. Valid k: 0..5.
Polygon hourglass_element(int k);

/// Isosceles trapezoid with bottom edge length 1, top edge length 1/2,
/// and height 0.5 * 2^-k. Valid k: 0..5.
Polygon trapezoid_element(int k);

/// The triangle (0,0), (1,0), (0,1).
Polygon reference_triangle();

Polygon translated(const Polygon& poly, const Vector2& shift);
Polygon scaled(const Polygon& poly, Scalar factor);
Polygon rotated(const Polygon& poly, Scalar angle);

/// Reads the single-polygon text format: first line the vertex count n,
/// then n lines "x y" in counterclockwise order.
Polygon read_polygon(std::istream& in);

}  // namespace hrvem
