#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(HRVEM_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("basic eig run succeeds with defaults filled") {
  CHECK(run("eig --element triangle --p 1 --fem-refine 1 --out cli_t1.csv") == 0);
  const std::string text = slurp("cli_t1.csv");
  CHECK(text.rfind("element,k,p,stab,gmin,gmax,dropped,condA,condB\n", 0) == 0);
  // Default stabilization list is projection,dofi: one row each.
  CHECK(count_lines(text) == 3);
  CHECK(text.find("triangle,0,1,projection,") != std::string::npos);
  CHECK(text.find("triangle,0,1,dofi,") != std::string::npos);
  std::remove("cli_t1.csv");
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("eig --element triangle --p 0 2>/dev/null") == 2);
  CHECK(run("eig --element hourglass:7 2>/dev/null") == 2);
  CHECK(run("eig --element triangle --no-such-flag 2>/dev/null") == 2);
  CHECK(run("eig --element triangle --p 1..3 --element hourglass:0..2 2>/dev/null") == 2);
  CHECK(run("2>/dev/null") == 2);
}

TEST_CASE("help exits cleanly") {
  CHECK(run("--help > /dev/null") == 0);
  CHECK(run("eig --help > /dev/null") == 0);
}

TEST_CASE("degree range produces one row per degree and stabilization") {
  CHECK(run("eig --element triangle --p 1..2 --stab projection --fem-refine 1 "
            "--out cli_range.csv") == 0);
  const std::string text = slurp("cli_range.csv");
  CHECK(count_lines(text) == 3);
  std::remove("cli_range.csv");
}

TEST_CASE("element file input") {
  {
    std::ofstream out("cli_square.poly");
    out << "4\n0 0\n1 0\n1 1\n0 1\n";
  }
  CHECK(run("eig --element file:cli_square.poly --p 1 --fem-refine 1 "
            "--out cli_sq.csv") == 0);
  const std::string text = slurp("cli_sq.csv");
  CHECK(text.find("file,0,1,projection,") != std::string::npos);
  std::remove("cli_square.poly");
  std::remove("cli_sq.csv");

  CHECK(run("eig --element file:does_not_exist.poly --p 1 2>/dev/null") == 1);
}

TEST_CASE("markdown format") {
  CHECK(run("eig --element triangle --p 1 --stab dofi --fem-refine 1 "
            "--format md --out cli_md.md") == 0);
  const std::string text = slurp("cli_md.md");
  CHECK(text.rfind("| element |", 0) == 0);
  std::remove("cli_md.md");
}

TEST_CASE("interp study emits the rate table") {
  CHECK(run("interp --family square-grid --levels 2 --p 1 --fem-refine 1 "
            "--out cli_interp.csv") == 0);
  const std::string text = slurp("cli_interp.csv");
  CHECK(text.rfind("h,e_div,e_L2,rate_div,rate_L2\n", 0) == 0);
  CHECK(count_lines(text) == 3);
  // First data row carries empty rate fields.
  const auto first_row = text.substr(text.find('\n') + 1);
  CHECK(first_row.substr(0, first_row.find('\n')).back() == ',');
  std::remove("cli_interp.csv");
}

TEST_CASE("repeated runs are bit identical") {
  const std::string cmd =
      "eig --element hourglass:0..1 --p 1 --fem-refine 1 --threads 2 --out ";
  CHECK(run(cmd + "cli_rep1.csv") == 0);
  CHECK(run(cmd + "cli_rep2.csv") == 0);
  const std::string a = slurp("cli_rep1.csv");
  const std::string b = slurp("cli_rep2.csv");
  CHECK(!a.empty());
  CHECK(a == b);
  std::remove("cli_rep1.csv");
  std::remove("cli_rep2.csv");
}
