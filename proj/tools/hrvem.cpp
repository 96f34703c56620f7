// Command-line driver: spectral studies (`eig`), interpolation-rate
// studies (`interp`), and the property suite (`check`).
//
// Exit codes: 0 success, 1 runtime/numerical failure, 2 usage error.

#include <CLI11.hpp>

#include <hrvem/check.hpp>
#include <hrvem/eigenstudy.hpp>
#include <hrvem/interp.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace hrvem;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4e", v);
  return buf;
}

struct ElementSpec {
  enum class Type { Triangle, Hourglass, Trapezoid, File };
  Type type = Type::Triangle;
  int k_first = 0;
  int k_last = 0;
  bool is_range = false;
  std::string path;

  std::string label() const {
    switch (type) {
      case Type::Triangle: return "triangle";
      case Type::Hourglass: return "hourglass";
      case Type::Trapezoid: return "trapezoid";
      case Type::File: return "file";
    }
    return "?";
  }
};

bool parse_int_range(const std::string& text, int& first, int& last, bool& is_range) {
  const auto pos = text.find("..");
  try {
    if (pos == std::string::npos) {
      first = last = std::stoi(text);
      is_range = false;
    } else {
      first = std::stoi(text.substr(0, pos));
      last = std::stoi(text.substr(pos + 2));
      is_range = true;
    }
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

ElementSpec parse_element(const std::string& text) {
  ElementSpec spec;
  if (text == "triangle") {
    spec.type = ElementSpec::Type::Triangle;
    return spec;
  }
  if (text.rfind("file:", 0) == 0) {
    spec.type = ElementSpec::Type::File;
    spec.path = text.substr(5);
    if (spec.path.empty()) throw CLI::ValidationError("--element", "empty file path");
    return spec;
  }
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw CLI::ValidationError("--element", "unknown element '" + text + "'");
  }
  const std::string kind = text.substr(0, colon);
  if (kind == "hourglass") {
    spec.type = ElementSpec::Type::Hourglass;
  } else if (kind == "trapezoid") {
    spec.type = ElementSpec::Type::Trapezoid;
  } else {
    throw CLI::ValidationError("--element", "unknown element '" + kind + "'");
  }
  if (!parse_int_range(text.substr(colon + 1), spec.k_first, spec.k_last,
                       spec.is_range)) {
    throw CLI::ValidationError("--element", "malformed index in '" + text + "'");
  }
  if (spec.k_first < 0 || spec.k_last > 5 || spec.k_first > spec.k_last) {
    throw CLI::ValidationError("--element", "sequence index must lie in 0..5");
  }
  return spec;
}

Polygon single_element(const ElementSpec& spec) {
  switch (spec.type) {
    case ElementSpec::Type::Triangle:
      return reference_triangle();
    case ElementSpec::Type::Hourglass:
      return hourglass_element(spec.k_first);
    case ElementSpec::Type::Trapezoid:
      return trapezoid_element(spec.k_first);
    case ElementSpec::Type::File: {
      std::ifstream in(spec.path);
      if (!in) throw std::runtime_error("cannot open element file: " + spec.path);
      return read_polygon(in);
    }
  }
  throw std::logic_error("unreachable");
}

struct MaterialFlags {
  std::string preset = "compressible";
  double lambda = -1.0;
  double mu = -1.0;

  Material resolve() const {
    Material mat = preset == "incompressible" ? Material::incompressible()
                                              : Material::compressible();
    const double l = lambda >= 0.0 ? lambda : mat.lambda;
    const double m = mu > 0.0 ? mu : mat.mu;
    return Material(l, m);
  }
};

std::vector<StabSpec> parse_stabs(const std::string& list, const std::string& weight,
                                  bool reduced) {
  const StabWeight w =
      weight == "trace-D" ? StabWeight::TraceD : StabWeight::InverseMu;
  std::vector<StabSpec> stabs;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "projection") {
      stabs.push_back({StabSpec::Kind::Projection, w, reduced});
    } else if (item == "dofi") {
      stabs.push_back({StabSpec::Kind::Dofi, StabWeight::InverseMu, false});
    } else if (!item.empty()) {
      throw CLI::ValidationError("--stab", "unknown stabilization '" + item + "'");
    }
  }
  if (stabs.empty()) throw CLI::ValidationError("--stab", "empty stabilization list");
  return stabs;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + out_path);
  out << text;
}

std::string eig_table(const std::vector<EigRecord>& records, const std::string& format) {
  std::ostringstream out;
  if (format == "md") {
    out << "| element | k | p | stab | gmin | gmax | dropped | condA | condB |\n";
    out << "|---|---|---|---|---|---|---|---|---|\n";
    for (const EigRecord& r : records) {
      out << "| " << r.element << " | " << r.k << " | " << r.p << " | " << r.stab
          << " | " << sci(r.gmin) << " | " << sci(r.gmax) << " | " << r.dropped
          << " | " << sci(r.cond_a) << " | " << sci(r.cond_b) << " |\n";
    }
  } else {
    out << "element,k,p,stab,gmin,gmax,dropped,condA,condB\n";
    for (const EigRecord& r : records) {
      out << r.element << ',' << r.k << ',' << r.p << ',' << r.stab << ','
          << sci(r.gmin) << ',' << sci(r.gmax) << ',' << r.dropped << ','
          << sci(r.cond_a) << ',' << sci(r.cond_b) << '\n';
    }
  }
  return out.str();
}

std::string rate_table(const std::vector<RateRow>& rows, const std::string& format) {
  std::ostringstream out;
  auto rate = [](double v) { return std::isnan(v) ? std::string() : sci(v); };
  if (format == "md") {
    out << "| h | e_div | e_L2 | rate_div | rate_L2 |\n|---|---|---|---|---|\n";
    for (const RateRow& r : rows) {
      out << "| " << sci(r.h) << " | " << sci(r.e_div) << " | " << sci(r.e_l2)
          << " | " << rate(r.rate_div) << " | " << rate(r.rate_l2) << " |\n";
    }
  } else {
    out << "h,e_div,e_L2,rate_div,rate_L2\n";
    for (const RateRow& r : rows) {
      out << sci(r.h) << ',' << sci(r.e_div) << ',' << sci(r.e_l2) << ','
          << rate(r.rate_div) << ',' << rate(r.rate_l2) << '\n';
    }
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local Hellinger-Reissner virtual element studies"};
  app.require_subcommand(1);

  // --- eig ---
  auto* eig = app.add_subcommand("eig", "generalized eigenvalue studies");
  std::string eig_element = "triangle";
  std::string eig_p = "1";
  MaterialFlags eig_mat;
  std::string eig_stab = "projection,dofi";
  std::string eig_weight = "inv-mu";
  bool eig_reduced = false;
  int eig_fem_degree = 0;
  int eig_fem_refine = 3;
  std::string eig_out, eig_format = "csv";
  int eig_threads = 1;
  eig->add_option("--element", eig_element,
                  "triangle | hourglass:<k|a..b> | trapezoid:<k|a..b> | file:<path>");
  eig->add_option("--p", eig_p, "degree of accuracy, single value or range a..b");
  eig->add_option("--material", eig_mat.preset, "compressible | incompressible")
      ->check(CLI::IsMember({"compressible", "incompressible"}));
  eig->add_option("--lambda", eig_mat.lambda, "first Lame modulus");
  eig->add_option("--mu", eig_mat.mu, "second Lame modulus");
  eig->add_option("--stab", eig_stab, "comma list of projection,dofi");
  eig->add_option("--stab-weight", eig_weight, "inv-mu | trace-D")
      ->check(CLI::IsMember({"inv-mu", "trace-D"}));
  eig->add_flag("--stab-reduced", eig_reduced,
                "drop the divergence term of the projection stabilization");
  eig->add_option("--fem-degree", eig_fem_degree, "surrogate degree k (0 = p+1)");
  eig->add_option("--fem-refine", eig_fem_refine, "surrogate refinement level")
      ->check(CLI::Range(0, 6));
  eig->add_option("--out", eig_out, "output path (default stdout)");
  eig->add_option("--format", eig_format, "csv | md")
      ->check(CLI::IsMember({"csv", "md"}));
  eig->add_option("--threads", eig_threads, "parallelism cap")->check(CLI::Range(1, 64));

  // --- interp ---
  auto* interp = app.add_subcommand("interp", "interpolation convergence study");
  std::string interp_family = "square-grid";
  int interp_levels = 4;
  int interp_p = 1;
  std::string interp_w = "preset:trig";
  MaterialFlags interp_mat;
  int interp_fem_degree = 0;
  int interp_fem_refine = 3;
  std::string interp_out, interp_format = "csv";
  interp->add_option("--family", interp_family, "square-grid | triangle-grid")
      ->check(CLI::IsMember({"square-grid", "triangle-grid"}));
  interp->add_option("--levels", interp_levels, "number of refinement levels")
      ->check(CLI::Range(1, 8));
  interp->add_option("--p", interp_p, "degree of accuracy")->check(CLI::Range(1, 6));
  interp->add_option("--w", interp_w, "preset:trig | preset:poly");
  interp->add_option("--material", interp_mat.preset, "compressible | incompressible")
      ->check(CLI::IsMember({"compressible", "incompressible"}));
  interp->add_option("--lambda", interp_mat.lambda, "first Lame modulus");
  interp->add_option("--mu", interp_mat.mu, "second Lame modulus");
  interp->add_option("--fem-degree", interp_fem_degree, "surrogate degree k (0 = p+1)");
  interp->add_option("--fem-refine", interp_fem_refine, "surrogate refinement level")
      ->check(CLI::Range(0, 6));
  interp->add_option("--out", interp_out, "output path (default stdout)");
  interp->add_option("--format", interp_format, "csv | md")
      ->check(CLI::IsMember({"csv", "md"}));

  // --- check ---
  auto* check = app.add_subcommand("check", "run the full property suite");
  std::uint64_t check_seed = 42;
  int check_threads = 1;
  check->add_option("--seed", check_seed, "seed for randomized properties");
  check->add_option("--threads", check_threads, "parallelism cap")
      ->check(CLI::Range(1, 64));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (eig->parsed()) {
      const ElementSpec spec = parse_element(eig_element);
      int p_first = 1, p_last = 1;
      bool p_range = false;
      if (!parse_int_range(eig_p, p_first, p_last, p_range)) {
        std::cerr << "hrvem: malformed --p '" << eig_p << "'\n";
        return 2;
      }
      if (p_first < 1 || p_last > 6 || p_first > p_last) {
        std::cerr << "hrvem: --p must lie in 1..6\n";
        return 2;
      }
      if (spec.is_range && p_range) {
        std::cerr << "hrvem: use either an element range or a p range, not both\n";
        return 2;
      }
      const Material mat = eig_mat.resolve();
      const std::vector<StabSpec> stabs =
          parse_stabs(eig_stab, eig_weight, eig_reduced);
      const FemConfig cfg{eig_fem_degree, eig_fem_refine};

      std::vector<EigRecord> records;
      if (spec.is_range) {
        const ElementSequence seq = spec.type == ElementSpec::Type::Hourglass
                                        ? ElementSequence::Hourglass
                                        : ElementSequence::Trapezoid;
        records = sequence_study(seq, spec.k_first, spec.k_last, p_first, mat,
                                 stabs, cfg, eig_threads);
      } else {
        const Polygon poly = single_element(spec);
        records = degree_study(spec.label(), poly, p_first, p_last, mat, stabs,
                               cfg, eig_threads);
        for (EigRecord& r : records) r.k = spec.k_first;
      }
      emit(eig_table(records, eig_format), eig_out);
      return 0;
    }

    if (interp->parsed()) {
      const MeshFamily family = interp_family == "square-grid"
                                    ? MeshFamily::SquareGrid
                                    : MeshFamily::TriangleGrid;
      DisplacementField w;
      if (interp_w == "preset:trig") {
        w = trig_displacement();
      } else if (interp_w == "preset:poly") {
        w = poly_displacement(interp_p + 1);
      } else {
        std::cerr << "hrvem: unknown displacement preset '" << interp_w << "'\n";
        return 2;
      }
      const Material mat = interp_mat.resolve();
      FemConfig cfg{interp_fem_degree, interp_fem_refine};
      if (cfg.degree <= 0) cfg = FemConfig::for_order(interp_p, cfg.nref);
      const std::vector<RateRow> rows =
          convergence_study(family, interp_levels, interp_p, mat, w, cfg);
      emit(rate_table(rows, interp_format), interp_out);
      return 0;
    }

    std::ostringstream log;
    const int failures = run_property_suite(check_seed, log, check_threads);
    std::cout << log.str();
    return failures == 0 ? 0 : 1;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "hrvem: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "hrvem: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "hrvem: " << e.what() << "\n";
    return 1;
  }
}
