// Acceptance suite: one pass/fail line per criterion, nonzero exit when
// any criterion fails.

#include <hrvem/check.hpp>
#include <hrvem/eigenstudy.hpp>
#include <hrvem/interp.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace hrvem;
using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int criterion, bool ok, const std::string& detail, double seconds,
            double budget_seconds) {
  const bool in_budget = seconds <= budget_seconds;
  const bool pass = ok && in_budget;
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << criterion << ": "
            << detail << "  [" << seconds << " s, budget " << budget_seconds
            << " s]\n";
  if (!pass) ++failures;
}

bool within(double value, double target, double rel) {
  return std::abs(value - target) <= rel * std::abs(target);
}

void criterion_1_table3_anchor() {
  const auto start = Clock::now();
  const Polygon tri = reference_triangle();
  const Material mat = Material::compressible();
  const std::vector<StabSpec> stabs = {{StabSpec::Kind::Projection}};
  const double targets[3][2] = {
      {1.0000e+00, 1.7600e+02}, {9.9802e-01, 5.9800e+02}, {9.9640e-01, 1.2708e+03}};

  bool ok = true;
  std::ostringstream detail;
  for (int p = 1; p <= 3; ++p) {
    const EigRecord fine =
        element_records("triangle", 0, tri, p, mat, stabs, FemConfig::for_order(p, 3))[0];
    const EigRecord coarse =
        element_records("triangle", 0, tri, p, mat, stabs, FemConfig::for_order(p, 2))[0];
    const bool anchors = within(fine.gmin, targets[p - 1][0], 0.10) &&
                         within(fine.gmax, targets[p - 1][1], 0.10);
    const bool stable = std::abs(fine.gmin - coarse.gmin) <= 0.01 * fine.gmin &&
                        std::abs(fine.gmax - coarse.gmax) <= 0.01 * fine.gmax;
    ok = ok && anchors && stable;
    detail << "p=" << p << " gmin=" << fine.gmin << " gmax=" << fine.gmax
           << (anchors ? "" : " [off target]") << (stable ? "" : " [nref drift >1%]")
           << "; ";
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  report(1, ok, "triangle sweep anchors, " + detail.str(), secs, 300.0);
}

void criterion_2_dofi_anchor() {
  const auto start = Clock::now();
  const std::vector<StabSpec> stabs = {{StabSpec::Kind::Dofi}};
  const EigRecord rec =
      element_records("triangle", 0, reference_triangle(), 4, Material::compressible(),
                      stabs, FemConfig::for_order(4, 3))[0];
  const bool ok = within(rec.gmin, 9.9057e-01, 0.10) && within(rec.gmax, 2.3313e+03, 0.10);
  std::ostringstream detail;
  detail << "p=4 dofi gmin=" << rec.gmin << " (target 9.9057e-01), gmax=" << rec.gmax
         << " (target 2.3313e+03)";
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  report(2, ok, detail.str(), secs, 300.0);
}

void criterion_3_hourglass_trend() {
  const auto start = Clock::now();
  const std::vector<StabSpec> stabs = {{StabSpec::Kind::Projection}};
  const auto records =
      sequence_study(ElementSequence::Hourglass, 0, 5, 1, Material::compressible(),
                     stabs, FemConfig::for_order(1, 3), 1);
  double gmax_min = 1e300, gmax_max = 0.0, gmin_k2 = 0.0, gmin_k5 = 0.0;
  for (const EigRecord& r : records) {
    gmax_min = std::min(gmax_min, r.gmax);
    gmax_max = std::max(gmax_max, r.gmax);
    if (r.k == 2) gmin_k2 = r.gmin;
    if (r.k == 5) gmin_k5 = r.gmin;
  }
  const double decay = gmin_k5 / gmin_k2;
  const double spread = gmax_max / gmax_min;
  const bool ok = decay < 0.1 && spread < 2.0;
  std::ostringstream detail;
  detail << "gmin(k=5)/gmin(k=2)=" << decay << " (<0.1), gmax spread=" << spread
         << " (<2)";
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  report(3, ok, detail.str(), secs, 120.0);
}

void criterion_4_trapezoid_incompressible() {
  const auto start = Clock::now();
  const std::vector<StabSpec> stabs = {{StabSpec::Kind::Projection}};
  const auto records =
      sequence_study(ElementSequence::Trapezoid, 0, 5, 2, Material::incompressible(),
                     stabs, FemConfig::for_order(2, 3), 1);
  bool growth = true;
  std::ostringstream detail;
  for (int k = 0; k < 3; ++k) {
    const double ratio = records[k + 1].cond_a / records[k].cond_a;
    growth = growth && ratio >= 4.0;
    detail << "condA x" << ratio << " ";
  }
  bool tail = true;
  for (const EigRecord& r : records) {
    if (r.k >= 4) {
      const bool flagged = r.gmin < 1e-8 || r.dropped > 0;
      tail = tail && flagged;
      detail << "k=" << r.k << " gmin=" << r.gmin << " dropped=" << r.dropped << " ";
    }
  }
  const bool ok = growth && tail;
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  report(4, ok, detail.str(), secs, 180.0);
}

void criterion_5_interpolation_rates() {
  const auto start = Clock::now();
  bool ok = true;
  std::ostringstream detail;
  for (int p = 1; p <= 2; ++p) {
    const auto rows =
        convergence_study(MeshFamily::SquareGrid, 4, p, Material::compressible(),
                          trig_displacement(), FemConfig::for_order(p, 3));
    const double rate_div = rows.back().rate_div;
    const double rate_l2 = rows.back().rate_l2;
    const double target = p + 1 - 0.2;
    const bool pass = rate_div >= target && rate_l2 >= target;
    ok = ok && pass;
    detail << "p=" << p << " rate_div=" << rate_div << " rate_L2=" << rate_l2
           << " (target " << target << "); ";
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  report(5, ok, detail.str(), secs, 600.0);
}

void criterion_6_property_suite() {
  const auto start = Clock::now();
  const std::string cmd = std::string(HRVEM_CLI_PATH) + " check --seed 42";
  const int status = std::system(cmd.c_str());
  const int code = WEXITSTATUS(status);
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  report(6, code == 0, "hrvem check --seed 42 exit code " + std::to_string(code),
         secs, 300.0);
}

}  // namespace

int main() {
  criterion_1_table3_anchor();
  criterion_2_dofi_anchor();
  criterion_3_hourglass_trend();
  criterion_4_trapezoid_incompressible();
  criterion_5_interpolation_rates();
  criterion_6_property_suite();
  std::cout << (failures == 0 ? "acceptance: all criteria passed"
                              : "acceptance: " + std::to_string(failures) +
                                    " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
