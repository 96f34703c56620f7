#include <hrvem/geometry.hpp>

#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace hrvem {

Polygon polygon_from_vertices(const std::vector<Vector2>& vertices) {
  if (vertices.size() < 3) {
    throw std::invalid_argument("polygon needs at least 3 vertices");
  }
  const int n = static_cast<int>(vertices.size());

  Scalar twice_area = 0.0;
  Vector2 centroid_acc = Vector2::Zero();
  for (int i = 0; i < n; ++i) {
    const Vector2& a = vertices[i];
    const Vector2& b = vertices[(i + 1) % n];
    const Scalar cross = a.x() * b.y() - b.x() * a.y();
    twice_area += cross;
    centroid_acc += (a + b) * cross;
  }
  if (twice_area <= 0.0) {
    throw std::invalid_argument(
        "polygon vertices must be counterclockwise with positive area");
  }

  Polygon poly;
  poly.vertices = vertices;
  poly.area = 0.5 * twice_area;
  poly.centroid = centroid_acc / (3.0 * twice_area);

  poly.diameter = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      poly.diameter = std::max(poly.diameter, (vertices[i] - vertices[j]).norm());
    }
  }

  poly.edges.reserve(n);
  for (int i = 0; i < n; ++i) {
    Edge e;
    e.start = vertices[i];
    e.end = vertices[(i + 1) % n];
    const Vector2 d = e.end - e.start;
    e.length = d.norm();
    if (e.length <= 0.0) {
      throw std::invalid_argument("polygon has a degenerate edge");
    }
    const Vector2 t = d / e.length;
    e.normal = Vector2(t.y(), -t.x());
    e.midpoint = 0.5 * (e.start + e.end);
    poly.edges.push_back(e);
  }
  return poly;
}

bool star_shaped_wrt_centroid(const Polygon& poly) {
  for (const Edge& e : poly.edges) {
    const Triangle t{poly.centroid, e.start, e.end};
    if (t.area() <= 0.0) return false;
  }
  return true;
}

namespace {

void quadrisect(std::vector<Triangle>& triangles) {
  std::vector<Triangle> next;
  next.reserve(triangles.size() * 4);
  for (const Triangle& t : triangles) {
    const Vector2 mab = 0.5 * (t.a + t.b);
    const Vector2 mbc = 0.5 * (t.b + t.c);
    const Vector2 mca = 0.5 * (t.c + t.a);
    next.push_back({t.a, mab, mca});
    next.push_back({mab, t.b, mbc});
    next.push_back({mca, mbc, t.c});
    next.push_back({mab, mbc, mca});
  }
  triangles = std::move(next);
}

}  // namespace

SubTriangulation subtriangulate(const Polygon& poly, int nref) {
  if (nref < 0) throw std::invalid_argument("nref must be nonnegative");
  if (!star_shaped_wrt_centroid(poly)) {
    throw std::invalid_argument(
        "polygon is not star-shaped with respect to its centroid");
  }
  SubTriangulation st;
  st.refinement_level = nref;
  st.triangles.reserve(poly.edges.size());
  for (const Edge& e : poly.edges) {
    st.triangles.push_back({poly.centroid, e.start, e.end});
  }
  for (int r = 0; r < nref; ++r) quadrisect(st.triangles);
  return st;
}

Polygon hourglass_element(int k) {
  if (k < 0 || k > 5) throw std::invalid_argument("hourglass index must be 0..5");
  const Scalar half_gap = 0.25 * std::pow(2.0, -k);
  return polygon_from_vertices({{-0.5, -0.5},
                                {0.0, -half_gap},
                                {0.5, -0.5},
                                {0.5, 0.5},
                                {0.0, half_gap},
                                {-0.5, 0.5}});
}

Polygon trapezoid_element(int k) {
  if (k < 0 || k > 5) throw std::invalid_argument("trapezoid index must be 0..5");
  const Scalar height = 0.5 * std::pow(2.0, -k);
  return polygon_from_vertices(
      {{-0.5, 0.0}, {0.5, 0.0}, {0.25, height}, {-0.25, height}});
}

Polygon reference_triangle() {
  return polygon_from_vertices({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
}

Polygon translated(const Polygon& poly, const Vector2& shift) {
  std::vector<Vector2> v = poly.vertices;
  for (Vector2& p : v) p += shift;
  return polygon_from_vertices(v);
}

Polygon scaled(const Polygon& poly, Scalar factor) {
  if (factor <= 0.0) throw std::invalid_argument("scale factor must be positive");
  std::vector<Vector2> v = poly.vertices;
  for (Vector2& p : v) p *= factor;
  return polygon_from_vertices(v);
}

Polygon rotated(const Polygon& poly, Scalar angle) {
  const Scalar c = std::cos(angle), s = std::sin(angle);
  std::vector<Vector2> v = poly.vertices;
  for (Vector2& p : v) p = Vector2(c * p.x() - s * p.y(), s * p.x() + c * p.y());
  return polygon_from_vertices(v);
}

Polygon read_polygon(std::istream& in) {
  int n = 0;
  if (!(in >> n) || n < 3) {
    throw std::invalid_argument("polygon file: invalid vertex count");
  }
  std::vector<Vector2> v;
  v.reserve(n);
  for (int i = 0; i < n; ++i) {
    Scalar x, y;
    if (!(in >> x >> y)) {
      throw std::invalid_argument("polygon file: malformed vertex line");
    }
    v.emplace_back(x, y);
  }
  return polygon_from_vertices(v);
}

}  // namespace hrvem
