#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hrvem/geometry.hpp>

#include <cmath>
#include <sstream>

using namespace hrvem;

namespace {

// Independent shoelace area for triangle lists.
double fan_area(const SubTriangulation& st) {
  double total = 0.0;
  for (const Triangle& t : st.triangles) {
    total += 0.5 * ((t.b.x() - t.a.x()) * (t.c.y() - t.a.y()) -
                    (t.b.y() - t.a.y()) * (t.c.x() - t.a.x()));
  }
  return total;
}

}  // namespace

TEST_CASE("unit square properties") {
  const Polygon sq =
      polygon_from_vertices({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  CHECK(sq.area == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sq.centroid.x() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(sq.centroid.y() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(sq.diameter == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  for (const Edge& e : sq.edges) {
    CHECK(e.length == doctest::Approx(1.0));
    CHECK(e.normal.dot(e.midpoint - sq.centroid) > 0.0);
    CHECK(sq.diameter >= e.length);
  }
}

TEST_CASE("triangle properties") {
  const Polygon tri = polygon_from_vertices({{0, 0}, {1, 0}, {0, 1}});
  CHECK(tri.area == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(tri.centroid.x() == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(tri.centroid.y() == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(tri.diameter == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("clockwise input is rejected") {
  CHECK_THROWS_AS(polygon_from_vertices({{0, 0}, {0, 1}, {1, 1}, {1, 0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(polygon_from_vertices({{0, 0}, {1, 0}}), std::invalid_argument);
}

TEST_CASE("reference triangle") {
  const Polygon tri = reference_triangle();
  CHECK(tri.area == doctest::Approx(0.5));
  CHECK(tri.diameter == doctest::Approx(std::sqrt(2.0)));
  REQUIRE(tri.num_edges() == 3);
  CHECK(tri.edges[0].length == doctest::Approx(1.0));
  CHECK(tri.edges[1].length == doctest::Approx(std::sqrt(2.0)));
  CHECK(tri.edges[2].length == doctest::Approx(1.0));
}

TEST_CASE("subtriangulation counts and areas") {
  const Polygon sq = polygon_from_vertices({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  CHECK(subtriangulate(sq, 0).triangles.size() == 4);
  CHECK(subtriangulate(sq, 2).triangles.size() == 64);

  const Polygon hg = hourglass_element(5);
  const SubTriangulation st = subtriangulate(hg, 0);
  CHECK(st.triangles.size() == 6);
  CHECK(fan_area(st) == doctest::Approx(hg.area).epsilon(1e-12));
  for (const Triangle& t : st.triangles) CHECK(t.area() > 0.0);

  for (int nref = 0; nref <= 3; ++nref) {
    CHECK(fan_area(subtriangulate(hg, nref)) ==
          doctest::Approx(hg.area).epsilon(1e-12));
  }
}

TEST_CASE("hourglass sequence") {
  CHECK((hourglass_element(0).vertices[4] - hourglass_element(0).vertices[1]).norm() ==
        doctest::Approx(0.5));
  CHECK((hourglass_element(1).vertices[4] - hourglass_element(1).vertices[1]).norm() ==
        doctest::Approx(0.25));
  CHECK((hourglass_element(5).vertices[4] - hourglass_element(5).vertices[1]).norm() ==
        doctest::Approx(0.015625));
  CHECK_THROWS_AS(hourglass_element(6), std::invalid_argument);
  for (int k = 0; k <= 5; ++k) {
    const Polygon hg = hourglass_element(k);
    CHECK(star_shaped_wrt_centroid(hg));
    CHECK(hg.num_edges() == 6);
    // Symmetric about both axes: the vertex set maps to itself.
    CHECK(hg.centroid.norm() < 1e-14);
  }
}

TEST_CASE("trapezoid sequence") {
  const Polygon t0 = trapezoid_element(0);
  CHECK(t0.edges[0].length == doctest::Approx(1.0));
  CHECK(t0.edges[2].length == doctest::Approx(0.5));
  CHECK(trapezoid_element(3).vertices[2].y() == doctest::Approx(0.0625));
  for (int k = 0; k <= 5; ++k) {
    const Polygon t = trapezoid_element(k);
    // Isosceles: mirror symmetry about x = 0.
    CHECK(t.centroid.x() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(star_shaped_wrt_centroid(t));
  }
  CHECK_THROWS_AS(trapezoid_element(-1), std::invalid_argument);
}

TEST_CASE("rigid motion and scaling invariance of derived quantities") {
  const Polygon hg = hourglass_element(2);
  const Polygon moved = rotated(translated(hg, {1.25, -0.75}), 0.7);
  CHECK(moved.area == doctest::Approx(hg.area).epsilon(1e-12));
  CHECK(moved.diameter == doctest::Approx(hg.diameter).epsilon(1e-12));
  for (int e = 0; e < hg.num_edges(); ++e) {
    CHECK(moved.edges[e].length == doctest::Approx(hg.edges[e].length).epsilon(1e-12));
  }

  const double s = 3.7;
  const Polygon big = scaled(hg, s);
  CHECK(big.area == doctest::Approx(s * s * hg.area).epsilon(1e-12));
  CHECK(big.diameter == doctest::Approx(s * hg.diameter).epsilon(1e-12));
  for (int e = 0; e < hg.num_edges(); ++e) {
    CHECK(big.edges[e].length == doctest::Approx(s * hg.edges[e].length).epsilon(1e-12));
  }
}

TEST_CASE("non star-shaped polygon rejected by subtriangulate") {
  // L-shaped hexagon whose centroid cannot see the far corner of the notch.
  const Polygon ell = polygon_from_vertices(
      {{0, 0}, {4, 0}, {4, 1}, {1, 1}, {1, 4}, {0, 4}});
  CHECK(!star_shaped_wrt_centroid(ell));
  CHECK_THROWS_AS(subtriangulate(ell, 0), std::invalid_argument);
}

TEST_CASE("polygon text format") {
  std::istringstream in("4\n0 0\n1 0\n1 1\n0 1\n");
  const Polygon sq = read_polygon(in);
  CHECK(sq.area == doctest::Approx(1.0));

  std::istringstream bad("2\n0 0\n1 0\n");
  CHECK_THROWS_AS(read_polygon(bad), std::invalid_argument);
  std::istringstream junk("3\n0 0\nx y\n1 1\n");
  CHECK_THROWS_AS(read_polygon(junk), std::invalid_argument);
}
