#include <hrvem/interp.hpp>

#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>

namespace hrvem {

namespace {

Vector map_weights(const QuadratureRule& quad) {
  return Eigen::Map<const Vector>(quad.weights.data(), quad.size());
}

int default_quad_degree(const HrLocalSpace& space, int requested) {
  if (requested > 0) return requested;
  return 2 * space.degree() + 6;
}

}  // namespace

AnalyticStress stress_from_displacement(const Material& mat,
                                        const DisplacementField& w) {
  AnalyticStress sigma;
  const Scalar mu = mat.mu, lambda = mat.lambda;
  sigma.value = [mu, lambda, grad = w.gradient](const Vector2& x) {
    const Matrix2 g = grad(x);
    const Scalar div = g(0, 0) + g(1, 1);
    return Vector3(2.0 * mu * g(0, 0) + lambda * div,
                   2.0 * mu * g(1, 1) + lambda * div,
                   kSqrt2 * mu * (g(0, 1) + g(1, 0)));
  };
  sigma.divergence = [mu, lambda, lap = w.laplacian,
                      gdiv = w.grad_div](const Vector2& x) {
    return (mu * lap(x) + (mu + lambda) * gdiv(x)).eval();
  };
  return sigma;
}

DisplacementField trig_displacement() {
  const Scalar pi = 3.141592653589793238462643383279502884;
  DisplacementField w;
  w.value = [pi](const Vector2& x) {
    return Vector2(std::sin(pi * x.x()) * std::sin(pi * x.y()),
                   std::cos(pi * x.x()) * std::cos(pi * x.y()));
  };
  w.gradient = [pi](const Vector2& x) {
    Matrix2 g;
    g(0, 0) = pi * std::cos(pi * x.x()) * std::sin(pi * x.y());
    g(0, 1) = pi * std::sin(pi * x.x()) * std::cos(pi * x.y());
    g(1, 0) = -pi * std::sin(pi * x.x()) * std::cos(pi * x.y());
    g(1, 1) = -pi * std::cos(pi * x.x()) * std::sin(pi * x.y());
    return g;
  };
  w.laplacian = [pi](const Vector2& x) {
    return Vector2(-2.0 * pi * pi * std::sin(pi * x.x()) * std::sin(pi * x.y()),
                   -2.0 * pi * pi * std::cos(pi * x.x()) * std::cos(pi * x.y()));
  };
  w.grad_div = [pi](const Vector2& x) {
    // div w = pi cos(pi x) sin(pi y) - pi cos(pi x) sin(pi y) = 0.
    (void)x;
    return Vector2::Zero().eval();
  };
  return w;
}

DisplacementField poly_displacement(int degree) {
  if (degree < 1) throw std::invalid_argument("poly_displacement: degree >= 1");
  // w = (x^d + y^d + x y, x^d - 0.5 y^d + x - y), d = degree.
  const int d = degree;
  DisplacementField w;
  w.value = [d](const Vector2& p) {
    const Scalar xd = std::pow(p.x(), d), yd = std::pow(p.y(), d);
    return Vector2(xd + yd + p.x() * p.y(), xd - 0.5 * yd + p.x() - p.y());
  };
  w.gradient = [d](const Vector2& p) {
    const Scalar xd1 = d * std::pow(p.x(), d - 1), yd1 = d * std::pow(p.y(), d - 1);
    Matrix2 g;
    g(0, 0) = xd1 + p.y();
    g(0, 1) = yd1 + p.x();
    g(1, 0) = xd1 + 1.0;
    g(1, 1) = -0.5 * yd1 - 1.0;
    return g;
  };
  w.laplacian = [d](const Vector2& p) {
    const Scalar xd2 = d * (d - 1.0) * std::pow(p.x(), std::max(d - 2, 0));
    const Scalar yd2 = d * (d - 1.0) * std::pow(p.y(), std::max(d - 2, 0));
    return Vector2(xd2 + yd2, xd2 - 0.5 * yd2);
  };
  w.grad_div = [d](const Vector2& p) {
    // div w = d x^{d-1} + y - 0.5 d y^{d-1} - 1.
    const Scalar xd2 = d * (d - 1.0) * std::pow(p.x(), std::max(d - 2, 0));
    const Scalar yd2 = d * (d - 1.0) * std::pow(p.y(), std::max(d - 2, 0));
    return Vector2(xd2, 1.0 - 0.5 * yd2);
  };
  return w;
}

DisplacementField random_trig_displacement(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Scalar> amp(-1.0, 1.0);
  std::uniform_real_distribution<Scalar> freq(0.5, 2.5);
  std::uniform_real_distribution<Scalar> phase(0.0, 6.28);
  struct Term {
    Scalar a, kx, ky, ph;
  };
  std::vector<std::array<Term, 3>> comps(2);
  for (auto& comp : comps) {
    for (Term& t : comp) t = {amp(rng), freq(rng), freq(rng), phase(rng)};
  }
  auto series = [](const std::array<Term, 3>& c, const Vector2& x) {
    Scalar v = 0.0;
    for (const Term& t : c) v += t.a * std::sin(t.kx * x.x() + t.ky * x.y() + t.ph);
    return v;
  };
  auto series_dx = [](const std::array<Term, 3>& c, const Vector2& x, int axis) {
    Scalar v = 0.0;
    for (const Term& t : c) {
      const Scalar k = axis == 0 ? t.kx : t.ky;
      v += t.a * k * std::cos(t.kx * x.x() + t.ky * x.y() + t.ph);
    }
    return v;
  };
  auto series_dxx = [](const std::array<Term, 3>& c, const Vector2& x, int a1, int a2) {
    Scalar v = 0.0;
    for (const Term& t : c) {
      const Scalar k1 = a1 == 0 ? t.kx : t.ky;
      const Scalar k2 = a2 == 0 ? t.kx : t.ky;
      v -= t.a * k1 * k2 * std::sin(t.kx * x.x() + t.ky * x.y() + t.ph);
    }
    return v;
  };

  DisplacementField w;
  w.value = [=](const Vector2& x) {
    return Vector2(series(comps[0], x), series(comps[1], x));
  };
  w.gradient = [=](const Vector2& x) {
    Matrix2 g;
    g(0, 0) = series_dx(comps[0], x, 0);
    g(0, 1) = series_dx(comps[0], x, 1);
    g(1, 0) = series_dx(comps[1], x, 0);
    g(1, 1) = series_dx(comps[1], x, 1);
    return g;
  };
  w.laplacian = [=](const Vector2& x) {
    return Vector2(series_dxx(comps[0], x, 0, 0) + series_dxx(comps[0], x, 1, 1),
                   series_dxx(comps[1], x, 0, 0) + series_dxx(comps[1], x, 1, 1));
  };
  w.grad_div = [=](const Vector2& x) {
    return Vector2(series_dxx(comps[0], x, 0, 0) + series_dxx(comps[1], x, 1, 0),
                   series_dxx(comps[0], x, 0, 1) + series_dxx(comps[1], x, 1, 1));
  };
  return w;
}

Vector interpolate_stress(const HrLocalSpace& space, const AnalyticStress& sigma,
                          int quad_degree) {
  const int qd = default_quad_degree(space, quad_degree);
  const Polygon& poly = space.polygon();
  const int p = space.degree();
  Vector dofs = Vector::Zero(space.num_dofs());

  for (int e = 0; e < poly.num_edges(); ++e) {
    const Edge& edge = poly.edges[e];
    const QuadratureRule equad = edge_quadrature(edge, qd);
    const Matrix scal = eval_edge_scalar(space.edge_basis(e), equad.nodes);
    for (int q = 0; q < equad.size(); ++q) {
      const Vector2 tn = traction(sigma.value(equad.nodes[q]), edge.normal);
      for (int j = 0; j <= p; ++j) {
        const Scalar w = equad.weights[q] * scal(q, j) / edge.length;
        dofs[space.edge_dof_offset(e) + 2 * j] += w * tn.x();
        dofs[space.edge_dof_offset(e) + 2 * j + 1] += w * tn.y();
      }
    }
  }

  if (space.num_interior_dofs() > 0) {
    const QuadratureRule quad = element_quadrature(poly, qd);
    Matrix px, py;
    eval_vector(space.rm_perp(), quad.nodes, px, py);
    const Scalar moment_weight = poly.diameter / poly.area;
    for (int q = 0; q < quad.size(); ++q) {
      const Vector2 dv = sigma.divergence(quad.nodes[q]);
      for (int i = 0; i < space.num_interior_dofs(); ++i) {
        dofs[space.interior_dof_offset() + i] +=
            moment_weight * quad.weights[q] * (px(q, i) * dv.x() + py(q, i) * dv.y());
      }
    }
  }
  return dofs;
}

Scalar divergence_commutation_residual(const HrLocalSpace& space,
                                       const AnalyticStress& sigma,
                                       int quad_degree) {
  const int qd = default_quad_degree(space, quad_degree);
  const Vector dofs = interpolate_stress(space, sigma, qd);

  // Reconstructed divergence in the [rm | rm_perp] representation.
  const Vector rec_rm = space.div_rm_map() * dofs;
  const Vector rec_perp = space.div_perp_map() * dofs;

  // Full L2 projection of div sigma onto vector P_p in the same bases
  // (the two blocks are L2-orthogonal by construction).
  const Polygon& poly = space.polygon();
  const QuadratureRule quad = element_quadrature(poly, qd);
  Matrix rx, ry, px, py;
  eval_vector(space.rm(), quad.nodes, rx, ry);
  const int ni = space.num_interior_dofs();
  Vector b_rm = Vector::Zero(3), b_perp = Vector::Zero(ni);
  if (ni > 0) eval_vector(space.rm_perp(), quad.nodes, px, py);
  for (int q = 0; q < quad.size(); ++q) {
    const Vector2 dv = sigma.divergence(quad.nodes[q]);
    for (int a = 0; a < 3; ++a) {
      b_rm[a] += quad.weights[q] * (rx(q, a) * dv.x() + ry(q, a) * dv.y());
    }
    for (int i = 0; i < ni; ++i) {
      b_perp[i] += quad.weights[q] * (px(q, i) * dv.x() + py(q, i) * dv.y());
    }
  }
  const Vector proj_rm = space.rm_gram().ldlt().solve(b_rm);
  const Vector proj_perp =
      ni > 0 ? space.perp_mass().ldlt().solve(b_perp).eval() : Vector(0);

  const Vector d_rm = rec_rm - proj_rm;
  Scalar norm_sq = d_rm.dot(space.rm_gram() * d_rm);
  if (ni > 0) {
    const Vector d_perp = rec_perp - proj_perp;
    norm_sq += d_perp.dot(space.perp_mass() * d_perp);
  }
  return std::sqrt(std::max<Scalar>(norm_sq, 0.0));
}

namespace {

// || div sigma - Pi0_p div sigma ||_{0,K} by direct quadrature.
Scalar divergence_projection_error(const HrLocalSpace& space,
                                   const AnalyticStress& sigma, int qd) {
  const Polygon& poly = space.polygon();
  const QuadratureRule quad = element_quadrature(poly, qd);
  Matrix rx, ry, px, py;
  eval_vector(space.rm(), quad.nodes, rx, ry);
  const int ni = space.num_interior_dofs();
  if (ni > 0) eval_vector(space.rm_perp(), quad.nodes, px, py);

  Vector b_rm = Vector::Zero(3), b_perp = Vector::Zero(ni);
  for (int q = 0; q < quad.size(); ++q) {
    const Vector2 dv = sigma.divergence(quad.nodes[q]);
    for (int a = 0; a < 3; ++a) {
      b_rm[a] += quad.weights[q] * (rx(q, a) * dv.x() + ry(q, a) * dv.y());
    }
    for (int i = 0; i < ni; ++i) {
      b_perp[i] += quad.weights[q] * (px(q, i) * dv.x() + py(q, i) * dv.y());
    }
  }
  const Vector c_rm = space.rm_gram().ldlt().solve(b_rm);
  const Vector c_perp =
      ni > 0 ? space.perp_mass().ldlt().solve(b_perp).eval() : Vector(0);

  Scalar err_sq = 0.0;
  for (int q = 0; q < quad.size(); ++q) {
    Vector2 proj(0.0, 0.0);
    for (int a = 0; a < 3; ++a) {
      proj.x() += c_rm[a] * rx(q, a);
      proj.y() += c_rm[a] * ry(q, a);
    }
    for (int i = 0; i < ni; ++i) {
      proj.x() += c_perp[i] * px(q, i);
      proj.y() += c_perp[i] * py(q, i);
    }
    err_sq += quad.weights[q] * (sigma.divergence(quad.nodes[q]) - proj).squaredNorm();
  }
  return std::sqrt(std::max<Scalar>(err_sq, 0.0));
}

}  // namespace

InterpolationErrors interpolation_errors(const HrLocalSpace& space,
                                         const AnalyticStress& sigma,
                                         FemConfig config, bool certify) {
  const int qd = default_quad_degree(space, -1);
  InterpolationErrors errors;
  errors.e_div = divergence_projection_error(space, sigma, qd);

  const Vector dofs = interpolate_stress(space, sigma, qd);
  const LocalProblemData data = data_from_dofs(space, dofs);
  const int stress_qd = 2 * config.degree + 4;

  const LocalDisplacementSolver solver(space, config);
  errors.e_l2 = std::sqrt(std::max<Scalar>(
      solver.stress_error_sq(solver.solve(data), sigma.value, stress_qd), 0.0));

  if (certify) {
    FemConfig fine = config;
    fine.nref += 1;
    const LocalDisplacementSolver fine_solver(space, fine);
    const Scalar e_fine = std::sqrt(std::max<Scalar>(
        fine_solver.stress_error_sq(fine_solver.solve(data), sigma.value, stress_qd),
        0.0));
    errors.e_l2_drift = std::abs(errors.e_l2 - e_fine);
  }
  return errors;
}

std::vector<RateRow> convergence_study(MeshFamily family, int levels, int p,
                                       const Material& mat,
                                       const DisplacementField& w,
                                       FemConfig config) {
  if (levels < 1 || levels > 8) {
    throw std::invalid_argument("convergence_study: levels must be 1..8");
  }
  const AnalyticStress sigma = stress_from_displacement(mat, w);

  std::vector<RateRow> rows;
  for (int level = 0; level < levels; ++level) {
    const int n = 2 << level;  // 2, 4, 8, ...
    const Scalar h_cell = 1.0 / n;

    // Representative shapes at the origin cell; all other cells are
    // translates, so the factorizations are shared.
    std::vector<Polygon> shapes;
    if (family == MeshFamily::SquareGrid) {
      shapes.push_back(polygon_from_vertices(
          {{0, 0}, {h_cell, 0}, {h_cell, h_cell}, {0, h_cell}}));
    } else {
      shapes.push_back(
          polygon_from_vertices({{0, 0}, {h_cell, 0}, {h_cell, h_cell}}));
      shapes.push_back(
          polygon_from_vertices({{0, 0}, {h_cell, h_cell}, {0, h_cell}}));
    }
    std::vector<HrLocalSpace> spaces;
    spaces.reserve(shapes.size());
    std::vector<std::unique_ptr<LocalDisplacementSolver>> solvers;
    Scalar h_max = 0.0;
    for (const Polygon& shape : shapes) {
      spaces.emplace_back(shape, p, mat);
      solvers.push_back(
          std::make_unique<LocalDisplacementSolver>(spaces.back(), config));
      h_max = std::max(h_max, shape.diameter);
    }

    const int qd = 2 * p + 6;
    const int stress_qd = 2 * config.degree + 4;
    Scalar e_div_sq = 0.0, e_l2_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (size_t s = 0; s < shapes.size(); ++s) {
          const Vector2 shift(i * h_cell, j * h_cell);
          AnalyticStress shifted;
          shifted.value = [&sigma, shift](const Vector2& x) {
            return sigma.value(x + shift);
          };
          shifted.divergence = [&sigma, shift](const Vector2& x) {
            return sigma.divergence(x + shift);
          };
          const Scalar e_div = divergence_projection_error(spaces[s], shifted, qd);
          e_div_sq += e_div * e_div;
          const Vector dofs = interpolate_stress(spaces[s], shifted, qd);
          const Vector z = solvers[s]->solve(data_from_dofs(spaces[s], dofs));
          e_l2_sq += solvers[s]->stress_error_sq(z, shifted.value, stress_qd);
        }
      }
    }

    RateRow row;
    row.h = h_max;
    row.e_div = std::sqrt(std::max<Scalar>(e_div_sq, 0.0));
    row.e_l2 = std::sqrt(std::max<Scalar>(e_l2_sq, 0.0));
    if (level == 0) {
      row.rate_div = std::numeric_limits<Scalar>::quiet_NaN();
      row.rate_l2 = std::numeric_limits<Scalar>::quiet_NaN();
    } else {
      row.rate_div = std::log2(rows.back().e_div / row.e_div);
      row.rate_l2 = std::log2(rows.back().e_l2 / row.e_l2);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hrvem
