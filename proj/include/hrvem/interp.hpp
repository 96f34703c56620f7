// Interpolation onto the local HR space by matching degrees of freedom,
// the commuting-divergence identity, and interpolation-error studies on
// structured mesh families.

#pragma once

#include <hrvem/localsolver.hpp>

#include <functional>
#include <vector>

namespace hrvem {

/// Smooth stress given by pointwise evaluators (packed coordinates).
struct AnalyticStress {
  std::function<Vector3(const Vector2&)> value;
  std::function<Vector2(const Vector2&)> divergence;
};

/// Smooth displacement with the derivatives needed to build the stress
/// C grad_S(w) together with its divergence.
struct DisplacementField {
  std::function<Vector2(const Vector2&)> value;
  std::function<Matrix2(const Vector2&)> gradient;   // (i,j) = d w_i / d x_j
  std::function<Vector2(const Vector2&)> laplacian;
  std::function<Vector2(const Vector2&)> grad_div;
};

/// sigma = C grad_S(w); div sigma = mu lap(w) + (mu + lambda) grad(div w).
AnalyticStress stress_from_displacement(const Material& mat, const DisplacementField& w);

/// w = (sin(pi x) sin(pi y), cos(pi x) cos(pi y)).
DisplacementField trig_displacement();
/// Fixed-coefficient polynomial displacement of the given total degree.
DisplacementField poly_displacement(int degree);
/// Random low-frequency trigonometric field (used by the property suite).
DisplacementField random_trig_displacement(std::uint64_t seed);

/// Dof vector of the interpolant: edge dofs are the scaled traction
/// moments, interior dofs the scaled divergence moments. The default
/// quadrature degree is 2p + 6.
Vector interpolate_stress(const HrLocalSpace& space, const AnalyticStress& sigma,
                          int quad_degree = -1);

/// || div sigma_I - Pi0_p(div sigma) ||_{0,K}.
Scalar divergence_commutation_residual(const HrLocalSpace& space,
                                       const AnalyticStress& sigma,
                                       int quad_degree = -1);

struct InterpolationErrors {
  Scalar e_div = 0.0;       // || div sigma - Pi0_p div sigma ||_{0,K}
  Scalar e_l2 = 0.0;        // || sigma - sigma_I^h ||_{0,K} via the surrogate
  Scalar e_l2_drift = 0.0;  // self-estimate: |e_l2(nref) - e_l2(nref+1)|
};

InterpolationErrors interpolation_errors(const HrLocalSpace& space,
                                         const AnalyticStress& sigma,
                                         FemConfig config, bool certify = true);

enum class MeshFamily { SquareGrid, TriangleGrid };

struct RateRow {
  Scalar h = 0.0;
  Scalar e_div = 0.0;
  Scalar e_l2 = 0.0;
  Scalar rate_div = 0.0;  // NaN on the first row
  Scalar rate_l2 = 0.0;
};

/// Global interpolation errors on n x n grids, n = 2, 4, ..., 2^levels,
/// with observed orders log2(e(h)/e(h/2)). Elements within a level are
/// translates of at most two shapes, so one factorization per shape is
/// reused across the level.
std::vector<RateRow> convergence_study(MeshFamily family, int levels, int p,
                                       const Material& mat,
                                       const DisplacementField& w,
                                       FemConfig config);

}  // namespace hrvem
