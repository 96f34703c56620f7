#include <hrvem/check.hpp>

#include <hrvem/eigenstudy.hpp>
#include <hrvem/interp.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace hrvem {

namespace {

struct Reporter {
  std::ostream& log;
  int failures = 0;

  void operator()(const std::string& name, bool ok, Scalar measured, Scalar bound) {
    log << (ok ? "[ok]   " : "[FAIL] ") << name << "  (measured " << measured
        << ", bound " << bound << ")\n";
    if (!ok) ++failures;
  }
};

struct NamedElement {
  std::string name;
  Polygon poly;
};

std::vector<NamedElement> check_elements() {
  return {{"triangle", reference_triangle()},
          {"square", polygon_from_vertices({{0, 0}, {1, 0}, {1, 1}, {0, 1}})},
          {"hourglass0", hourglass_element(0)},
          {"hourglass3", hourglass_element(3)},
          {"trapezoid0", trapezoid_element(0)},
          {"trapezoid2", trapezoid_element(2)}};
}

Scalar min_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().minCoeff();
}

// Exact integral of x^a y^b over the reference triangle.
Scalar ref_triangle_moment(int a, int b) {
  Scalar f = 1.0;
  for (int i = 2; i <= a; ++i) f *= i;
  for (int i = 2; i <= b; ++i) f *= i;
  Scalar g = 1.0;
  for (int i = 2; i <= a + b + 2; ++i) g *= i;
  return f / g;
}

void check_quadrature(Reporter& report) {
  Scalar worst = 0.0;
  const Triangle ref{{0, 0}, {1, 0}, {0, 1}};
  for (int degree : {2, 6, 11, 16, 20, 30}) {
    const QuadratureRule rule = triangle_quadrature(ref, degree);
    for (int a = 0; a + 0 <= std::min(degree, 20); ++a) {
      for (int b = 0; a + b <= std::min(degree, 20); ++b) {
        Scalar s = 0.0;
        for (int q = 0; q < rule.size(); ++q) {
          s += rule.weights[q] * std::pow(rule.nodes[q].x(), a) *
               std::pow(rule.nodes[q].y(), b);
        }
        const Scalar exact = ref_triangle_moment(a, b);
        worst = std::max(worst, std::abs(s - exact) / std::max<Scalar>(1.0, exact));
      }
    }
  }
  // Segment moments of lambda^j on a skew segment.
  Edge edge;
  edge.start = {0.2, -0.4};
  edge.end = {1.4, 0.5};
  edge.length = (edge.end - edge.start).norm();
  edge.midpoint = 0.5 * (edge.start + edge.end);
  for (int degree : {5, 11, 21}) {
    const QuadratureRule rule = edge_quadrature(edge, degree);
    for (int j = 0; j <= degree; ++j) {
      Scalar s = 0.0;
      for (int q = 0; q < rule.size(); ++q) {
        const Scalar lambda =
            ((rule.nodes[q] - edge.midpoint).dot(edge.end - edge.start)) /
            (edge.length * edge.length);
        s += rule.weights[q] * std::pow(lambda, j);
      }
      const Scalar exact =
          (j % 2 == 0) ? edge.length / ((j + 1) * std::pow(2.0, j)) : 0.0;
      worst = std::max(worst, std::abs(s - exact) / std::max<Scalar>(1.0, exact));
    }
  }
  report("quadrature exactness (triangle and segment moments)", worst <= 1e-12,
         worst, 1e-12);
}

void check_reconstruction(Reporter& report) {
  // Traction and divergence reconstruction from dofs, on every member of
  // the polynomial stress space.
  Scalar worst_traction = 0.0, worst_div = 0.0;
  for (const NamedElement& el : check_elements()) {
    for (int p = 1; p <= 3; ++p) {
      const HrLocalSpace space(el.poly, p, Material::compressible());
      const StressBasis& basis = space.stress_basis();
      const int dim = poly_space_dim(p);
      for (int b = 0; b < basis.num_members(); ++b) {
        const Vector coeffs = basis.coeffs.col(b);
        const Vector dofs = space.stress_dof_matrix().col(b);
        for (int e = 0; e < el.poly.num_edges(); ++e) {
          const Edge& edge = el.poly.edges[e];
          const QuadratureRule equad = edge_quadrature(edge, 2 * p + 2);
          const Matrix rec = traction_values(space, dofs, e, equad.nodes);
          const Matrix mono = monomial_values(basis.frame, p, equad.nodes);
          const Vector t11 = mono * coeffs.segment(0, dim);
          const Vector t22 = mono * coeffs.segment(dim, dim);
          const Vector t12 = mono * coeffs.segment(2 * dim, dim) / kSqrt2;
          for (int q = 0; q < equad.size(); ++q) {
            const Vector2 exact(t11[q] * edge.normal.x() + t12[q] * edge.normal.y(),
                                t12[q] * edge.normal.x() + t22[q] * edge.normal.y());
            worst_traction = std::max(
                worst_traction, (rec.row(q).transpose() - exact).cwiseAbs().maxCoeff());
          }
        }
        const Matrix dx = monomial_derivative(p, basis.frame.scale, 0);
        const Matrix dy = monomial_derivative(p, basis.frame.scale, 1);
        const Vector div_x =
            dx * coeffs.segment(0, dim) + dy * coeffs.segment(2 * dim, dim) / kSqrt2;
        const Vector div_y =
            dx * coeffs.segment(2 * dim, dim) / kSqrt2 + dy * coeffs.segment(dim, dim);
        const Matrix rec = divergence_values(space, dofs, space.quad().nodes);
        const Matrix mono_lo =
            monomial_values(basis.frame, p - 1, space.quad().nodes);
        const Vector ex_x = mono_lo * div_x;
        const Vector ex_y = mono_lo * div_y;
        worst_div = std::max(worst_div, (rec.col(0) - ex_x).cwiseAbs().maxCoeff());
        worst_div = std::max(worst_div, (rec.col(1) - ex_y).cwiseAbs().maxCoeff());
      }
    }
  }
  report("dof/traction round-trip on polynomial stresses", worst_traction <= 1e-10,
         worst_traction, 1e-10);
  report("closed-form divergence on polynomial stresses", worst_div <= 1e-10,
         worst_div, 1e-10);
}

void check_projector(Reporter& report) {
  Scalar worst_repro = 0.0, worst_idem = 0.0;
  for (const NamedElement& el : check_elements()) {
    for (int p = 1; p <= 3; ++p) {
      const HrLocalSpace space(el.poly, p, Material::compressible());
      const int m_t = space.stress_basis().num_members();
      const Matrix repro =
          space.projector_coeffs() * space.stress_dof_matrix() -
          Matrix::Identity(m_t, m_t);
      worst_repro = std::max(worst_repro, repro.cwiseAbs().maxCoeff());
      const Matrix pi = space.projector_dofs();
      worst_idem = std::max(
          worst_idem, (pi * pi - pi).cwiseAbs().maxCoeff() /
                          std::max<Scalar>(1.0, pi.cwiseAbs().maxCoeff()));
    }
  }
  report("projector reproduces polynomial stresses", worst_repro <= 1e-10,
         worst_repro, 1e-10);
  report("projector idempotence", worst_idem <= 1e-10, worst_idem, 1e-10);
}

void check_commuting_identity(Reporter& report, std::uint64_t seed) {
  Scalar worst = 0.0;
  const Material mat = Material::compressible();
  for (const NamedElement& el : check_elements()) {
    const HrLocalSpace space(el.poly, 2, mat);
    for (int trial = 0; trial < 20; ++trial) {
      const DisplacementField w =
          random_trig_displacement(seed * 1000003u + trial * 97u);
      const AnalyticStress sigma = stress_from_displacement(mat, w);
      worst = std::max(worst, divergence_commutation_residual(space, sigma, 16));
    }
  }
  report("commuting divergence identity on random smooth stresses",
         worst <= 1e-9, worst, 1e-9);
}

void check_spd(Reporter& report) {
  bool ok = true;
  Scalar worst = 1e300;
  for (const NamedElement& el : check_elements()) {
    for (int p = 1; p <= 3; ++p) {
      const HrLocalSpace space(el.poly, p, Material::compressible());
      const Matrix s = stab_projection(space);
      const Matrix sd = stab_dofi(space);
      const Matrix a = local_a_matrix(space, s);
      const ComplianceResult b = compliance_matrix(space, FemConfig::for_order(p, 2));
      for (const Matrix* m : {&s, &sd, &a, &b.matrix}) {
        const Scalar lo = min_eig(*m);
        worst = std::min(worst, lo);
        ok = ok && lo > 0.0;
      }
    }
  }
  report("S, dofi-S, A, B are SPD on all test elements (p <= 3)", ok, worst, 0.0);
}

void check_stab_pencil(Reporter& report) {
  bool ok = true;
  Scalar worst = 1e300;
  for (const NamedElement& el : check_elements()) {
    for (int p = 1; p <= 4; ++p) {
      const HrLocalSpace space(el.poly, p, Material::compressible());
      const GeneralizedSpectrum spec =
          generalized_eigenvalues(stab_dofi(space), stab_projection(space));
      const Scalar lo = spec.eigenvalues.minCoeff();
      const Scalar hi = spec.eigenvalues.maxCoeff();
      worst = std::min(worst, lo);
      ok = ok && lo > 0.0 && std::isfinite(hi) && spec.dropped_b_modes == 0;
    }
  }
  report("pencil of the two stabilizations is positive (p <= 4)", ok, worst, 0.0);
}

void check_gauge_invariance(Reporter& report) {
  const HrLocalSpace space(hourglass_element(0), 1, Material::compressible());
  const FemConfig cfg = FemConfig::for_order(1, 2);
  const Matrix b_vol = compliance_matrix(space, cfg, RmGauge::Volume).matrix;
  const Matrix b_bnd = compliance_matrix(space, cfg, RmGauge::Boundary).matrix;
  const Scalar drift =
      (b_vol - b_bnd).cwiseAbs().maxCoeff() / b_vol.cwiseAbs().maxCoeff();
  report("B is invariant under the rigid-motion gauge", drift <= 1e-8, drift, 1e-8);
}

void check_spectrum_invariance(Reporter& report) {
  const Material mat = Material::compressible();
  const int p = 1;
  const FemConfig cfg = FemConfig::for_order(p, 2);
  const Polygon base = hourglass_element(1);
  const std::vector<StabSpec> stabs = {{StabSpec::Kind::Projection}};

  const EigRecord rec0 = element_records("base", 0, base, p, mat, stabs, cfg)[0];
  const EigRecord rec_t = element_records(
      "shift", 0, translated(base, {3.0, -2.0}), p, mat, stabs, cfg)[0];
  const EigRecord rec_s =
      element_records("scale", 0, scaled(base, 2.5), p, mat, stabs, cfg)[0];
  const EigRecord rec_r =
      element_records("rot", 0, rotated(base, 0.83), p, mat, stabs, cfg)[0];

  const Scalar drift_t = std::max(std::abs(rec_t.gmin - rec0.gmin) / rec0.gmin,
                                  std::abs(rec_t.gmax - rec0.gmax) / rec0.gmax);
  const Scalar drift_s = std::max(std::abs(rec_s.gmin - rec0.gmin) / rec0.gmin,
                                  std::abs(rec_s.gmax - rec0.gmax) / rec0.gmax);
  const Scalar drift_r = std::max(std::abs(rec_r.gmin - rec0.gmin) / rec0.gmin,
                                  std::abs(rec_r.gmax - rec0.gmax) / rec0.gmax);
  report("(A,B) spectrum invariant under translation", drift_t <= 1e-10, drift_t,
         1e-10);
  report("(A,B) spectrum invariant under uniform scaling", drift_s <= 1e-8,
         drift_s, 1e-8);
  report("(A,B) spectrum invariant under rotation (projection S)",
         drift_r <= 1e-8, drift_r, 1e-8);
}

void check_compatibility(Reporter& report) {
  Scalar worst = 0.0;
  for (const NamedElement& el : check_elements()) {
    for (int p = 1; p <= 2; ++p) {
      const HrLocalSpace space(el.poly, p, Material::compressible());
      for (int e = 0; e < el.poly.num_edges(); ++e) {
        for (int m = 0; m < 2 * (p + 1); ++m) {
          worst = std::max(worst,
                           compatibility_residual(space, face_problem_data(space, e, m)));
        }
      }
      for (int m = 0; m < space.num_interior_dofs(); ++m) {
        worst = std::max(worst,
                         compatibility_residual(space, bulk_problem_data(space, m)));
      }
    }
  }
  report("compatibility residual of every local problem", worst <= 1e-10, worst,
         1e-10);
}

void check_unisolvence(Reporter& report) {
  const HrLocalSpace space(reference_triangle(), 1, Material::compressible());
  Scalar prev = 1e300;
  bool decreasing = true;
  Scalar last = 0.0;
  // Face-type dual problems are corner singular; the defect decays like
  // the boundary-flux error (~h^0.5) once the corners are resolved.
  for (int nref : {3, 4, 5}) {
    last = unisolvence_defect(space, FemConfig{2, nref});
    decreasing = decreasing && last < prev;
    prev = last;
  }
  report("unisolvence defect decreases under refinement", decreasing, last, 1.0);
}

}  // namespace

int run_property_suite(std::uint64_t seed, std::ostream& log, int threads) {
  (void)threads;  // the suite is cheap enough to stay sequential
  Reporter report{log};
  check_quadrature(report);
  check_reconstruction(report);
  check_projector(report);
  check_commuting_identity(report, seed);
  check_spd(report);
  check_stab_pencil(report);
  check_gauge_invariance(report);
  check_spectrum_invariance(report);
  check_compatibility(report);
  check_unisolvence(report);
  log << (report.failures == 0 ? "all checks passed\n"
                               : std::to_string(report.failures) + " checks failed\n");
  return report.failures;
}

}  // namespace hrvem
