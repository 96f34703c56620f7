#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hrvem/eigenstudy.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <random>

using namespace hrvem;

TEST_CASE("identical operands give a unit spectrum") {
  Matrix a(3, 3);
  a << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  const GeneralizedSpectrum spec = generalized_eigenvalues(a, a);
  CHECK(spec.dropped_b_modes == 0);
  for (int i = 0; i < 3; ++i) {
    CHECK(spec.eigenvalues[i] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("diagonal pencil") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 8.0;
  const GeneralizedSpectrum spec = generalized_eigenvalues(a, Matrix::Identity(2, 2));
  CHECK(spec.eigenvalues[0] == doctest::Approx(2.0));
  CHECK(spec.eigenvalues[1] == doctest::Approx(8.0));
}

TEST_CASE("random SPD pencil matches the dense inverse oracle") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 10;
    Matrix raw_a(n, n), raw_b(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        raw_a(i, j) = dist(rng);
        raw_b(i, j) = dist(rng);
      }
    }
    const Matrix a = raw_a * raw_a.transpose() + 0.5 * Matrix::Identity(n, n);
    const Matrix b = raw_b * raw_b.transpose() + 0.5 * Matrix::Identity(n, n);

    const GeneralizedSpectrum spec = generalized_eigenvalues(a, b);
    REQUIRE(spec.eigenvalues.size() == n);

    // Brute force: eigenvalues of B^-1 A.
    const Matrix binv_a = b.inverse() * a;
    Eigen::EigenSolver<Matrix> es(binv_a);
    std::vector<double> oracle(n);
    for (int i = 0; i < n; ++i) oracle[i] = es.eigenvalues()[i].real();
    std::sort(oracle.begin(), oracle.end());
    for (int i = 0; i < n; ++i) {
      CHECK(spec.eigenvalues[i] == doctest::Approx(oracle[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("singular B falls back and reports dropped modes") {
  Matrix q(3, 3);
  q << 0.6, -0.8, 0, 0.8, 0.6, 0, 0, 0, 1;
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 2.0;
  d(1, 1) = 1.0;
  d(2, 2) = 0.0;  // exactly singular direction
  const Matrix b = q * d * q.transpose();
  const GeneralizedSpectrum spec =
      generalized_eigenvalues(Matrix::Identity(3, 3), b);
  CHECK(spec.dropped_b_modes == 1);
  REQUIRE(spec.eigenvalues.size() == 2);
  CHECK(spec.eigenvalues.minCoeff() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(spec.eigenvalues.maxCoeff() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("condition numbers") {
  CHECK(condition_number(Matrix::Identity(4, 4)) == doctest::Approx(1.0));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 100.0;
  CHECK(condition_number(d) == doctest::Approx(100.0));
}

TEST_CASE("stabilization labels") {
  CHECK(StabSpec{StabSpec::Kind::Projection}.label() == "projection");
  CHECK(StabSpec{StabSpec::Kind::Dofi}.label() == "dofi");
  CHECK(StabSpec{StabSpec::Kind::Projection, StabWeight::TraceD}.label() ==
        "projection-traceD");
  CHECK(StabSpec{StabSpec::Kind::Projection, StabWeight::InverseMu, true}.label() ==
        "projection-reduced");
}

TEST_CASE("triangle records sit near the published sweep values") {
  const std::vector<StabSpec> stabs = {{StabSpec::Kind::Projection},
                                       {StabSpec::Kind::Dofi}};
  const auto records =
      element_records("triangle", 0, reference_triangle(), 1,
                      Material::compressible(), stabs, FemConfig::for_order(1, 2));
  REQUIRE(records.size() == 2);
  CHECK(records[0].stab == "projection");
  CHECK(records[0].gmin == doctest::Approx(1.0).epsilon(0.05));
  CHECK(records[0].gmax == doctest::Approx(176.0).epsilon(0.05));
  CHECK(records[0].dropped == 0);
  CHECK(records[0].cond_a > 1.0);
  CHECK(records[0].cond_b > 1.0);
  CHECK(records[1].stab == "dofi");
  CHECK(records[1].gmin > 0.0);
}

TEST_CASE("sequence study ordering and positivity") {
  const std::vector<StabSpec> stabs = {{StabSpec::Kind::Projection},
                                       {StabSpec::Kind::Dofi}};
  const auto records =
      sequence_study(ElementSequence::Hourglass, 0, 1, 1, Material::compressible(),
                     stabs, FemConfig::for_order(1, 1), 2);
  REQUIRE(records.size() == 4);
  CHECK(records[0].k == 0);
  CHECK(records[1].k == 0);
  CHECK(records[2].k == 1);
  CHECK(records[3].k == 1);
  for (const EigRecord& r : records) {
    CHECK(r.gmin > 0.0);
    CHECK(r.gmax >= r.gmin);
  }

  // Deterministic across thread counts.
  const auto serial =
      sequence_study(ElementSequence::Hourglass, 0, 1, 1, Material::compressible(),
                     stabs, FemConfig::for_order(1, 1), 1);
  REQUIRE(serial.size() == records.size());
  for (size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].gmin == records[i].gmin);
    CHECK(serial[i].gmax == records[i].gmax);
  }
}

TEST_CASE("degree study covers the requested range") {
  const std::vector<StabSpec> stabs = {{StabSpec::Kind::Projection}};
  const auto records =
      degree_study("triangle", reference_triangle(), 1, 2, Material::compressible(),
                   stabs, FemConfig{0, 1}, 1);
  REQUIRE(records.size() == 2);
  CHECK(records[0].p == 1);
  CHECK(records[1].p == 2);
  CHECK_THROWS_AS(degree_study("triangle", reference_triangle(), 0, 2,
                               Material::compressible(), stabs, FemConfig{0, 1}, 1),
                  std::invalid_argument);
}
