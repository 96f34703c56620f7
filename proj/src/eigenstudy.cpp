#include <hrvem/eigenstudy.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <atomic>
#include <thread>

namespace hrvem {

GeneralizedSpectrum generalized_eigenvalues(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw std::invalid_argument("generalized_eigenvalues: size mismatch");
  }
  const Matrix a_sym = 0.5 * (a + a.transpose());
  const Matrix b_sym = 0.5 * (b + b.transpose());

  GeneralizedSpectrum result;
  Eigen::LLT<Matrix> llt(b_sym);
  if (llt.info() == Eigen::Success) {
    // Reduce to L^-1 A L^-T and solve by tridiagonalization + QR.
    const Matrix half = llt.matrixL().solve(a_sym);
    const Matrix reduced = llt.matrixL().solve(half.transpose()).transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (reduced + reduced.transpose()));
    result.eigenvalues = es.eigenvalues();
    return result;
  }

  // B is numerically singular: project onto its dominant eigenspace.
  Eigen::SelfAdjointEigenSolver<Matrix> es_b(b_sym);
  const Vector evals = es_b.eigenvalues();
  const Scalar cutoff = 1e-12 * evals.maxCoeff();
  std::vector<int> kept;
  for (int i = 0; i < evals.size(); ++i) {
    if (evals[i] > cutoff) kept.push_back(i);
  }
  result.dropped_b_modes = static_cast<int>(evals.size() - kept.size());
  if (kept.empty()) {
    result.eigenvalues = Vector(0);
    return result;
  }
  Matrix basis(b_sym.rows(), kept.size());
  for (size_t i = 0; i < kept.size(); ++i) {
    basis.col(i) = es_b.eigenvectors().col(kept[i]) / std::sqrt(evals[kept[i]]);
  }
  const Matrix reduced = basis.transpose() * a_sym * basis;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (reduced + reduced.transpose()));
  result.eigenvalues = es.eigenvalues();
  return result;
}

Scalar condition_number(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const Vector abs_evals = es.eigenvalues().cwiseAbs();
  return abs_evals.maxCoeff() / std::max(abs_evals.minCoeff(), 1e-300);
}

std::string StabSpec::label() const {
  if (kind == Kind::Dofi) return "dofi";
  std::string name = "projection";
  if (weight == StabWeight::TraceD) name += "-traceD";
  if (reduced) name += "-reduced";
  return name;
}

std::vector<EigRecord> element_records(const std::string& label, int k,
                                       const Polygon& poly, int p,
                                       const Material& mat,
                                       const std::vector<StabSpec>& stabs,
                                       FemConfig config) {
  if (config.degree <= 0) config = FemConfig::for_order(p, config.nref);
  const HrLocalSpace space(poly, p, mat);
  const ComplianceResult b = compliance_matrix(space, config);
  const Scalar cond_b = condition_number(b.matrix);

  std::vector<EigRecord> records;
  records.reserve(stabs.size());
  for (const StabSpec& spec : stabs) {
    const Matrix s = spec.kind == StabSpec::Kind::Dofi
                         ? stab_dofi(space)
                         : stab_projection(space, spec.weight, spec.reduced);
    const Matrix a = local_a_matrix(space, s);
    const GeneralizedSpectrum spectrum = generalized_eigenvalues(a, b.matrix);

    EigRecord rec;
    rec.element = label;
    rec.k = k;
    rec.p = p;
    rec.stab = spec.label();
    rec.cond_a = condition_number(a);
    rec.cond_b = cond_b;
    rec.dropped = spectrum.dropped_b_modes;
    if (spectrum.eigenvalues.size() > 0) {
      rec.gmax = spectrum.eigenvalues.maxCoeff();
      const Scalar cutoff = 1e-12 * std::abs(rec.gmax);
      Scalar gmin = rec.gmax;
      for (int i = 0; i < spectrum.eigenvalues.size(); ++i) {
        const Scalar ev = spectrum.eigenvalues[i];
        if (ev <= cutoff) {
          ++rec.dropped;
        } else {
          gmin = std::min(gmin, ev);
        }
      }
      rec.gmin = gmin;
    }
    records.push_back(rec);
  }
  return records;
}

namespace {

// Deterministic fan-out: results land in slot order regardless of the
// number of worker threads.
template <typename Job>
void run_jobs(int count, int threads, Job&& job) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace

std::vector<EigRecord> sequence_study(ElementSequence sequence, int k_first,
                                      int k_last, int p, const Material& mat,
                                      const std::vector<StabSpec>& stabs,
                                      FemConfig config, int threads) {
  if (k_first < 0 || k_last > 5 || k_first > k_last) {
    throw std::invalid_argument("sequence_study: k range must lie in 0..5");
  }
  const int count = k_last - k_first + 1;
  std::vector<std::vector<EigRecord>> slots(count);
  const std::string label =
      sequence == ElementSequence::Hourglass ? "hourglass" : "trapezoid";
  run_jobs(count, threads, [&](int i) {
    const int k = k_first + i;
    const Polygon poly = sequence == ElementSequence::Hourglass
                             ? hourglass_element(k)
                             : trapezoid_element(k);
    slots[i] = element_records(label, k, poly, p, mat, stabs, config);
  });
  std::vector<EigRecord> records;
  for (const auto& slot : slots) {
    records.insert(records.end(), slot.begin(), slot.end());
  }
  return records;
}

std::vector<EigRecord> degree_study(const std::string& label, const Polygon& poly,
                                    int p_first, int p_last, const Material& mat,
                                    const std::vector<StabSpec>& stabs,
                                    FemConfig config, int threads) {
  if (p_first < 1 || p_last > 6 || p_first > p_last) {
    throw std::invalid_argument("degree_study: p range must lie in 1..6");
  }
  const int count = p_last - p_first + 1;
  std::vector<std::vector<EigRecord>> slots(count);
  run_jobs(count, threads, [&](int i) {
    const int p = p_first + i;
    FemConfig cfg = config;
    if (cfg.degree <= 0) cfg = FemConfig::for_order(p, config.nref);
    slots[i] = element_records(label, 0, poly, p, mat, stabs, cfg);
  });
  std::vector<EigRecord> records;
  for (const auto& slot : slots) {
    records.insert(records.end(), slot.begin(), slot.end());
  }
  return records;
}

}  // namespace hrvem
