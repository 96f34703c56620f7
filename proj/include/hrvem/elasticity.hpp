// Isotropic material law: stiffness C and compliance D acting on symmetric
// 2x2 tensors, in the dimension-generic dev/tr form specialized to d = 2.

#pragma once

#include <hrvem/types.hpp>

namespace hrvem {

struct Material {
  Scalar lambda = 1.0;
  Scalar mu = 1.0;

  Material() = default;
  Material(Scalar lambda_, Scalar mu_) : lambda(lambda_), mu(mu_) {
    if (mu <= 0.0) throw std::invalid_argument("material: mu must be positive");
    if (lambda < 0.0) throw std::invalid_argument("material: lambda must be nonnegative");
  }

  static Material compressible() { return Material(1.0, 1.0); }
  static Material incompressible() { return Material(1e5, 1.0); }

  /// Stiffness C tau = 2 mu tau + lambda tr(tau) I as a 3x3 matrix on
  /// (t11, t22, sqrt2*t12) coordinates.
  Matrix3 stiffness_matrix() const {
    Matrix3 c = 2.0 * mu * Matrix3::Identity();
    c(0, 0) += lambda;
    c(0, 1) += lambda;
    c(1, 0) += lambda;
    c(1, 1) += lambda;
    return c;
  }

  /// Compliance D = C^-1 as a 3x3 matrix on the same coordinates.
  Matrix3 compliance_matrix() const {
    const Scalar inv2mu = 1.0 / (2.0 * mu);
    const Scalar bulk = 2.0 * mu + 2.0 * lambda;
    Matrix3 d = Matrix3::Zero();
    d(0, 0) = d(1, 1) = 0.5 * (inv2mu + 1.0 / bulk);
    d(0, 1) = d(1, 0) = 0.5 * (1.0 / bulk - inv2mu);
    d(2, 2) = inv2mu;
    return d;
  }

  Scalar compliance_trace() const { return compliance_matrix().trace(); }
};

/// C applied to a packed symmetric tensor.
inline Vector3 c_apply(const Material& m, const Vector3& tau) {
  const Scalar tr = tau[0] + tau[1];
  Vector3 out = 2.0 * m.mu * tau;
  out[0] += m.lambda * tr;
  out[1] += m.lambda * tr;
  return out;
}

inline Matrix2 c_apply(const Material& m, const Matrix2& tau) {
  return vec_to_sym(c_apply(m, sym_to_vec(tau)));
}

/// D applied to a packed symmetric tensor; inverse of c_apply.
inline Vector3 d_apply(const Material& m, const Vector3& tau) {
  const Scalar tr = tau[0] + tau[1];
  Vector3 dev = tau;
  dev[0] -= 0.5 * tr;
  dev[1] -= 0.5 * tr;
  Vector3 out = dev / (2.0 * m.mu);
  const Scalar iso = tr / (2.0 * (2.0 * m.mu + 2.0 * m.lambda));
  out[0] += iso;
  out[1] += iso;
  return out;
}

inline Matrix2 d_apply(const Material& m, const Matrix2& tau) {
  return vec_to_sym(d_apply(m, sym_to_vec(tau)));
}

}  // namespace hrvem
