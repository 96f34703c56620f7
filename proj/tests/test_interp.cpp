#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hrvem/interp.hpp>

#include <cmath>

using namespace hrvem;

namespace {

// Pointwise evaluators for a packed polynomial stress.
AnalyticStress polynomial_stress(const HrLocalSpace& space, const Vector& coeffs) {
  const StressBasis& basis = space.stress_basis();
  const int p = space.degree();
  const int dim = poly_space_dim(p);
  const Matrix dx = monomial_derivative(p, basis.frame.scale, 0);
  const Matrix dy = monomial_derivative(p, basis.frame.scale, 1);
  const Vector div_x =
      dx * coeffs.segment(0, dim) + dy * coeffs.segment(2 * dim, dim) / kSqrt2;
  const Vector div_y =
      dx * coeffs.segment(2 * dim, dim) / kSqrt2 + dy * coeffs.segment(dim, dim);

  AnalyticStress sigma;
  sigma.value = [&basis, coeffs, p, dim](const Vector2& x) {
    const Matrix mono = monomial_values(basis.frame, p, {x});
    return Vector3((mono * coeffs.segment(0, dim))(0),
                   (mono * coeffs.segment(dim, dim))(0),
                   (mono * coeffs.segment(2 * dim, dim))(0));
  };
  sigma.divergence = [&basis, div_x, div_y, p](const Vector2& x) {
    const Matrix mono = monomial_values(basis.frame, p - 1, {x});
    return Vector2((mono * div_x)(0), (mono * div_y)(0));
  };
  return sigma;
}

// w = (sin(pi x) sin(pi y), x^2 y^3) with hand-coded derivatives.
DisplacementField mixed_displacement() {
  const double pi = 3.141592653589793238462643383279502884;
  DisplacementField w;
  w.value = [pi](const Vector2& x) {
    return Vector2(std::sin(pi * x.x()) * std::sin(pi * x.y()),
                   x.x() * x.x() * x.y() * x.y() * x.y());
  };
  w.gradient = [pi](const Vector2& x) {
    Matrix2 g;
    g(0, 0) = pi * std::cos(pi * x.x()) * std::sin(pi * x.y());
    g(0, 1) = pi * std::sin(pi * x.x()) * std::cos(pi * x.y());
    g(1, 0) = 2.0 * x.x() * std::pow(x.y(), 3);
    g(1, 1) = 3.0 * x.x() * x.x() * x.y() * x.y();
    return g;
  };
  w.laplacian = [pi](const Vector2& x) {
    return Vector2(-2.0 * pi * pi * std::sin(pi * x.x()) * std::sin(pi * x.y()),
                   2.0 * std::pow(x.y(), 3) + 6.0 * x.x() * x.x() * x.y());
  };
  w.grad_div = [pi](const Vector2& x) {
    // div w = pi cos(pi x) sin(pi y) + 3 x^2 y^2.
    return Vector2(-pi * pi * std::sin(pi * x.x()) * std::sin(pi * x.y()) +
                       6.0 * x.x() * x.y() * x.y(),
                   pi * pi * std::cos(pi * x.x()) * std::cos(pi * x.y()) +
                       6.0 * x.x() * x.x() * x.y());
  };
  return w;
}

}  // namespace

TEST_CASE("interpolating a polynomial stress returns its dofs") {
  for (const Polygon& poly : {reference_triangle(), hourglass_element(1)}) {
    for (int p : {1, 2}) {
      const HrLocalSpace space(poly, p, Material::compressible());
      const StressBasis& basis = space.stress_basis();
      const Matrix s = stab_projection(space);
      for (int b = 0; b < basis.num_members(); b += 3) {
        const AnalyticStress sigma = polynomial_stress(space, basis.coeffs.col(b));
        const Vector dofs = interpolate_stress(space, sigma);
        const Vector expected = space.stress_dof_matrix().col(b);
        CHECK((dofs - expected).cwiseAbs().maxCoeff() <
              1e-11 * std::max(1.0, expected.cwiseAbs().maxCoeff()));

        // The stabilization seminorm of (I - Pi) sigma_I vanishes.
        const Vector kernel_part =
            dofs - space.projector_dofs() * dofs;
        CHECK(std::sqrt(std::abs(kernel_part.dot(s * kernel_part))) < 1e-9);
      }
    }
  }
}

TEST_CASE("zero stress interpolates to zero dofs") {
  const HrLocalSpace space(trapezoid_element(0), 2, Material::compressible());
  AnalyticStress zero;
  zero.value = [](const Vector2&) { return Vector3::Zero().eval(); };
  zero.divergence = [](const Vector2&) { return Vector2::Zero().eval(); };
  CHECK(interpolate_stress(space, zero).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("smooth stress interpolates without error") {
  const HrLocalSpace space(reference_triangle(), 1, Material::compressible());
  const AnalyticStress sigma =
      stress_from_displacement(Material::compressible(), trig_displacement());
  const Vector dofs = interpolate_stress(space, sigma);
  CHECK(dofs.allFinite());
  CHECK(dofs.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("commuting identity") {
  const Material mat = Material::compressible();

  // Polynomial stresses commute to roundoff.
  const HrLocalSpace space1(reference_triangle(), 1, mat);
  const AnalyticStress poly_sigma =
      polynomial_stress(space1, space1.stress_basis().coeffs.col(2));
  CHECK(divergence_commutation_residual(space1, poly_sigma) < 1e-11);

  // Smooth mixed displacement on the triangle at p = 2. The residual is
  // pure quadrature error; pi-frequency data on a unit-size element needs
  // a degree-16 rule to reach 1e-9 (the default 2p+6 gives ~1e-5).
  const HrLocalSpace space2(reference_triangle(), 2, mat);
  const AnalyticStress sigma = stress_from_displacement(mat, mixed_displacement());
  CHECK(divergence_commutation_residual(space2, sigma, 16) < 1e-9);
  const double d10 = divergence_commutation_residual(space2, sigma, 10);
  const double d14 = divergence_commutation_residual(space2, sigma, 14);
  CHECK(d14 < d10);
}

TEST_CASE("divergence error computed two ways agrees") {
  const Material mat = Material::compressible();
  const HrLocalSpace space(trapezoid_element(1), 2, mat);
  const AnalyticStress sigma = stress_from_displacement(mat, mixed_displacement());
  const int qd = 2 * space.degree() + 6;

  const InterpolationErrors errors =
      interpolation_errors(space, sigma, FemConfig::for_order(2, 1), false);

  // Independent route: || div sigma - div sigma_I || with the closed-form
  // divergence reconstruction.
  const Vector dofs = interpolate_stress(space, sigma, qd);
  const QuadratureRule quad = element_quadrature(space.polygon(), qd);
  const Matrix rec = divergence_values(space, dofs, quad.nodes);
  double err_sq = 0.0;
  for (int q = 0; q < quad.size(); ++q) {
    const Vector2 diff = sigma.divergence(quad.nodes[q]) -
                         Vector2(rec(q, 0), rec(q, 1));
    err_sq += quad.weights[q] * diff.squaredNorm();
  }
  CHECK(std::abs(errors.e_div - std::sqrt(err_sq)) < 1e-10);
}

TEST_CASE("interpolation errors on polynomial data sit at the floor") {
  const Material mat = Material::compressible();
  const int p = 2;
  const HrLocalSpace space(reference_triangle(), p, mat);
  const AnalyticStress sigma =
      stress_from_displacement(mat, poly_displacement(p + 1));
  const InterpolationErrors errors =
      interpolation_errors(space, sigma, FemConfig::for_order(p, 1), false);
  CHECK(errors.e_div < 1e-11);
  CHECK(errors.e_l2 < 1e-9);
}

TEST_CASE("divergence error decreases with the degree") {
  const Material mat = Material::compressible();
  const AnalyticStress sigma = stress_from_displacement(mat, mixed_displacement());
  const HrLocalSpace s1(reference_triangle(), 1, mat);
  const HrLocalSpace s2(reference_triangle(), 2, mat);
  const InterpolationErrors e1 =
      interpolation_errors(s1, sigma, FemConfig::for_order(1, 1), false);
  const InterpolationErrors e2 =
      interpolation_errors(s2, sigma, FemConfig::for_order(2, 1), false);
  CHECK(e2.e_div < e1.e_div);
}

TEST_CASE("self-certification of the surrogate error") {
  const Material mat = Material::compressible();
  const HrLocalSpace space(reference_triangle(), 1, mat);
  const AnalyticStress sigma = stress_from_displacement(mat, trig_displacement());
  const InterpolationErrors errors =
      interpolation_errors(space, sigma, FemConfig::for_order(1, 1), true);
  CHECK(errors.e_l2 > 0.0);
  CHECK(errors.e_l2_drift >= 0.0);
  CHECK(errors.e_l2_drift < errors.e_l2);
}

TEST_CASE("short convergence study shows the expected trend") {
  const std::vector<RateRow> rows =
      convergence_study(MeshFamily::SquareGrid, 3, 1, Material::compressible(),
                        trig_displacement(), FemConfig::for_order(1, 1));
  REQUIRE(rows.size() == 3);
  CHECK(std::isnan(rows[0].rate_div));
  CHECK(rows[1].e_div < rows[0].e_div);
  CHECK(rows[2].e_div < rows[1].e_div);
  CHECK(rows[2].rate_div > 1.5);
  CHECK(rows[2].rate_l2 > 1.5);

  const std::vector<RateRow> tri_rows =
      convergence_study(MeshFamily::TriangleGrid, 2, 1, Material::compressible(),
                        trig_displacement(), FemConfig::for_order(1, 1));
  REQUIRE(tri_rows.size() == 2);
  CHECK(tri_rows[1].e_div < tri_rows[0].e_div);
}
