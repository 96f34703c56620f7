#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hrvem/quadrature.hpp>

#include <cmath>

using namespace hrvem;

namespace {

// Analytic integral of x^a y^b over the reference triangle:
// a! b! / (a + b + 2)!.
double ref_triangle_moment(int a, int b) {
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) / fact(a + b + 2);
}

double integrate(const QuadratureRule& rule, int a, int b) {
  double s = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    s += rule.weights[q] * std::pow(rule.nodes[q].x(), a) *
         std::pow(rule.nodes[q].y(), b);
  }
  return s;
}

}  // namespace

TEST_CASE("triangle rule exactness on the reference triangle") {
  const Triangle tri{{0, 0}, {1, 0}, {0, 1}};
  for (int degree : {0, 1, 2, 3, 5, 8, 12, 20, 30}) {
    const QuadratureRule rule = triangle_quadrature(tri, degree);
    for (int a = 0; a + 0 <= degree; ++a) {
      for (int b = 0; a + b <= degree; ++b) {
        const double exact = ref_triangle_moment(a, b);
        CHECK(integrate(rule, a, b) == doctest::Approx(exact).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("basic moments") {
  const Triangle tri{{0, 0}, {1, 0}, {0, 1}};
  const QuadratureRule rule = triangle_quadrature(tri, 3);
  CHECK(integrate(rule, 0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(integrate(rule, 1, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("element rule on the unit square") {
  const Polygon sq = polygon_from_vertices({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const QuadratureRule rule = element_quadrature(sq, 6);
  CHECK(rule.total_weight() == doctest::Approx(sq.area).epsilon(1e-13));
  CHECK(integrate(rule, 2, 2) == doctest::Approx(1.0 / 9.0).epsilon(1e-13));
  CHECK(integrate(rule, 3, 3) == doctest::Approx(1.0 / 16.0).epsilon(1e-13));
  CHECK_THROWS_AS(element_quadrature(sq, 31), std::invalid_argument);
}

TEST_CASE("element rule weights sum to the area on every generator") {
  for (int k = 0; k <= 5; ++k) {
    const Polygon hg = hourglass_element(k);
    CHECK(element_quadrature(hg, 8).total_weight() ==
          doctest::Approx(hg.area).epsilon(1e-12));
    const Polygon tz = trapezoid_element(k);
    CHECK(element_quadrature(tz, 8).total_weight() ==
          doctest::Approx(tz.area).epsilon(1e-12));
  }
}

TEST_CASE("edge rule integrates segment monomials") {
  Edge e;
  e.start = {1.0, 2.0};
  e.end = {4.0, 6.0};
  e.length = 5.0;
  e.midpoint = {2.5, 4.0};
  const QuadratureRule rule = edge_quadrature(e, 9);
  CHECK(rule.total_weight() == doctest::Approx(5.0).epsilon(1e-13));
  // Arclength moments of (s/L - 1/2)^j over the segment: L/(j+1)/2^j for
  // even j, zero for odd j.
  for (int j = 1; j <= 9; ++j) {
    double s = 0.0;
    for (int q = 0; q < rule.size(); ++q) {
      const double t = (rule.nodes[q] - e.start).norm() / e.length - 0.5;
      s += rule.weights[q] * std::pow(t, j);
    }
    const double exact = (j % 2 == 0) ? e.length / ((j + 1) * std::pow(2.0, j)) : 0.0;
    CHECK(s == doctest::Approx(exact).epsilon(1e-12));
  }
}
