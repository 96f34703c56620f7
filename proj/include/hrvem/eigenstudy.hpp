// Generalized symmetric eigenproblem A v = g B v, spectral condition
// numbers, and the batch drivers for the badly-shaped-element and
// degree-elevation studies.

#pragma once

#include <hrvem/localsolver.hpp>

#include <string>
#include <vector>

namespace hrvem {

struct GeneralizedSpectrum {
  Vector eigenvalues;      // ascending
  int dropped_b_modes = 0; // modes removed when B fails its Cholesky
};

/// Symmetrizes the inputs, Cholesky-factors B and solves the reduced
/// standard symmetric problem. When B is not SPD, falls back to the
/// eigendecomposition of B, drops modes below 1e-12 times its largest
/// eigenvalue, and solves on the retained subspace.
GeneralizedSpectrum generalized_eigenvalues(const Matrix& a, const Matrix& b);

/// Spectral condition number max|eig| / min|eig| of a symmetric matrix.
Scalar condition_number(const Matrix& m);

struct StabSpec {
  enum class Kind { Projection, Dofi };
  Kind kind = Kind::Projection;
  StabWeight weight = StabWeight::InverseMu;
  bool reduced = false;

  std::string label() const;
};

struct EigRecord {
  std::string element;
  int k = 0;  // sequence index (0 for fixed elements)
  int p = 1;
  std::string stab;
  Scalar gmin = 0.0;
  Scalar gmax = 0.0;
  int dropped = 0;  // B modes plus near-zero eigenvalues below 1e-12 gmax
  Scalar cond_a = 0.0;
  Scalar cond_b = 0.0;
};

/// Records for one element at one degree: B is built once and shared by
/// all requested stabilizations.
std::vector<EigRecord> element_records(const std::string& label, int k,
                                       const Polygon& poly, int p,
                                       const Material& mat,
                                       const std::vector<StabSpec>& stabs,
                                       FemConfig config);

enum class ElementSequence { Hourglass, Trapezoid };

/// Sequence study over k = k_first..k_last; per-element work may fan out
/// over `threads`, results are merged in sequence order.
std::vector<EigRecord> sequence_study(ElementSequence sequence, int k_first,
                                      int k_last, int p, const Material& mat,
                                      const std::vector<StabSpec>& stabs,
                                      FemConfig config, int threads = 1);

/// Degree study p = p_first..p_last on a fixed element; the fem degree
/// follows max(2, p+1) when config.degree <= 0.
std::vector<EigRecord> degree_study(const std::string& label, const Polygon& poly,
                                    int p_first, int p_last, const Material& mat,
                                    const std::vector<StabSpec>& stabs,
                                    FemConfig config, int threads = 1);

}  // namespace hrvem
