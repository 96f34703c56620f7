// Common scalar and dense types used across the library.
//
// Symmetric 2x2 tensors are stored as 3-vectors (t11, t22, sqrt(2)*t12) so
// that the Euclidean inner product of coefficient vectors equals the
// Frobenius inner product of the tensors.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace hrvem {

using Scalar = double;

using Vector2 = Eigen::Vector2d;
using Vector3 = Eigen::Vector3d;
using Matrix2 = Eigen::Matrix2d;
using Matrix3 = Eigen::Matrix3d;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr Scalar kSqrt2 = 1.4142135623730951;

/// Pack a symmetric 2x2 matrix into (t11, t22, sqrt2*t12) coordinates.
inline Vector3 sym_to_vec(const Matrix2& t, Scalar symmetry_tol = 1e-12) {
  const Scalar scale = std::max<Scalar>(1.0, t.cwiseAbs().maxCoeff());
  if (std::abs(t(0, 1) - t(1, 0)) > symmetry_tol * scale) {
    throw std::invalid_argument("sym_to_vec: tensor is not symmetric");
  }
  return Vector3(t(0, 0), t(1, 1), kSqrt2 * 0.5 * (t(0, 1) + t(1, 0)));
}

/// Unpack (t11, t22, sqrt2*t12) coordinates into a symmetric 2x2 matrix.
inline Matrix2 vec_to_sym(const Vector3& v) {
  Matrix2 t;
  const Scalar t12 = v[2] / kSqrt2;
  t << v[0], t12, t12, v[1];
  return t;
}

/// Traction t = tau * n of a packed symmetric tensor.
inline Vector2 traction(const Vector3& tau, const Vector2& n) {
  const Scalar t12 = tau[2] / kSqrt2;
  return Vector2(tau[0] * n[0] + t12 * n[1], t12 * n[0] + tau[1] * n[1]);
}

/// Relative symmetry defect max|M - M^T| / max|M|.
inline Scalar symmetry_defect(const Matrix& m) {
  const Scalar denom = std::max<Scalar>(m.cwiseAbs().maxCoeff(), 1e-300);
  return (m - m.transpose()).cwiseAbs().maxCoeff() / denom;
}

}  // namespace hrvem
