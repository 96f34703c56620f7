#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hrvem/elasticity.hpp>

#include <Eigen/Eigenvalues>

#include <random>

using namespace hrvem;

TEST_CASE("stiffness on simple tensors") {
  const Material m(1.0, 1.0);
  const Matrix2 id = Matrix2::Identity();
  CHECK((c_apply(m, id) - 4.0 * id).norm() < 1e-14);

  Matrix2 traceless;
  traceless << 0.3, -0.7, -0.7, -0.3;
  CHECK((c_apply(m, traceless) - 2.0 * m.mu * traceless).norm() < 1e-14);

  const Material stiff(1e5, 1.0);
  CHECK((c_apply(stiff, id) - (2.0 + 2e5) * id).norm() < 1e-9);
}

TEST_CASE("compliance on simple tensors") {
  const Material m(1.0, 1.0);
  const Matrix2 id = Matrix2::Identity();
  CHECK((d_apply(m, id) - 0.25 * id).norm() < 1e-14);

  Matrix2 traceless;
  traceless << 1.0, 2.0, 2.0, -1.0;
  CHECK((d_apply(m, traceless) - traceless / (2.0 * m.mu)).norm() < 1e-14);
}

TEST_CASE("compliance inverts stiffness on random tensors") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const Material& m :
       {Material(1.0, 1.0), Material(1e5, 1.0), Material(0.0, 0.5)}) {
    // The roundtrip loses digits proportional to cond(C) = O(lambda/mu).
    const double tol = 1e-13 + 50.0 * 2.2e-16 * (m.lambda / m.mu);
    for (int trial = 0; trial < 100; ++trial) {
      Matrix2 tau;
      const double a = dist(rng), b = dist(rng), c = dist(rng);
      tau << a, c, c, b;
      const Matrix2 back = d_apply(m, c_apply(m, tau));
      CHECK((back - tau).norm() <= tol * std::max(1.0, tau.norm()));
    }
  }
}

TEST_CASE("non-symmetric input rejected") {
  Matrix2 bad;
  bad << 1.0, 2.0, -2.0, 1.0;
  CHECK_THROWS_AS(c_apply(Material(1, 1), bad), std::invalid_argument);
  CHECK_THROWS_AS(d_apply(Material(1, 1), bad), std::invalid_argument);
}

TEST_CASE("matrix representations are SPD and mutually inverse") {
  for (const Material& m : {Material(1, 1), Material(1e5, 1), Material(0, 2)}) {
    const Matrix3 c = m.stiffness_matrix();
    const Matrix3 d = m.compliance_matrix();
    CHECK((c * d - Matrix3::Identity()).norm() < 1e-12);
    CHECK((c - c.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix3> es_c(c), es_d(d);
    CHECK(es_c.eigenvalues().minCoeff() > 0.0);
    CHECK(es_d.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("deviatoric lower bound of the compliance energy") {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (const Material& m : {Material(1, 1), Material(1e5, 1)}) {
    for (int trial = 0; trial < 50; ++trial) {
      Vector3 tau(dist(rng), dist(rng), dist(rng));
      const double tr = tau[0] + tau[1];
      Vector3 dev = tau;
      dev[0] -= 0.5 * tr;
      dev[1] -= 0.5 * tr;
      const double energy = d_apply(m, tau).dot(tau);
      CHECK(energy >= dev.squaredNorm() / (2.0 * m.mu) - 1e-13);
    }
  }
}

TEST_CASE("invalid moduli rejected") {
  CHECK_THROWS_AS(Material(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Material(-1.0, 1.0), std::invalid_argument);
}
