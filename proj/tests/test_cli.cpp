#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string output;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ifit_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

Result ifit(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "stdout.txt";
  const std::string cmd = std::string(IFIT_BINARY) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(log)};
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string single(const std::string& equation, const std::string& R, const std::string& I,
                   const std::string& fit, const std::string& mode = "polynomial",
                   const std::string& independent = "[\"x\"]", const std::string& dependent = "[\"y\"]") {
  return "[problem]\nlabel = \"t\"\nmode = \"" + mode + "\"\nindependent = " + independent +
         "\ndependent = " + dependent + "\nequation = \"" + equation + "\"\nR = " + R + "\nI = " + I +
         "\n\n[fit]\n" + fit + "\n";
}

std::string config(const char* name) { return std::string(IFIT_CONFIG_DIR) + "/" + name + ".cfg"; }

}  // namespace

TEST_CASE("sphere with schedule [6] writes the 6x6 coefficient table") {
  const fs::path dir = scratch("sphere6");
  const fs::path cfg = write_config(dir, "s.cfg",
                                    single("x^2 + y^2 + z^2 - 1", "[[-0.5, 0.5], [-0.5, 0.5]]", "[0, 1.5]",
                                           "schedule = [6]", "analytic", "[\"x\", \"y\"]", "[\"z\"]"));
  const Result r = ifit("run " + cfg.string() + " --out " + (dir / "out").string(), dir);
  REQUIRE(r.status == 0);
  const auto rows = csv_rows(dir / "out" / "coefficients.csv");
  REQUIRE(rows.size() == 37);
  CHECK(rows[0] == std::vector<std::string>{"b1", "b2", "coefficient"});
  CHECK(rows[1 + 2 * 6 + 2][0] == "2");
  CHECK(rows[1 + 2 * 6 + 2][1] == "2");
  CHECK(std::fabs(std::stod(rows[1 + 2 * 6 + 2][2]) - -0.24363) <= 2e-3);
  CHECK(std::fabs(std::stod(rows[1][2]) - 0.99997) <= 2e-3);
  CHECK(fs::exists(dir / "out" / "report.txt"));
  const auto surface = csv_rows(dir / "out" / "surface.csv");
  CHECK(surface[0] == std::vector<std::string>{"x1", "x2", "g", "residual"});
  CHECK(surface.size() == 1 + 101 * 101);
}

TEST_CASE("kepler N = 28 coefficient column") {
  const fs::path dir = scratch("kepler");
  const fs::path cfg = write_config(dir, "k.cfg",
                                    "[problem]\nlabel = \"k\"\nmode = \"analytic\"\nindependent = [\"M\"]\n"
                                    "dependent = [\"E\"]\nequation = \"E - sin(E) - M\"\nR = [0, 2*pi]\n"
                                    "I = [-pi, 3*pi]\ncenter = [pi]\n[fit]\nschedule = [28]\n");
  const Result r = ifit("run " + cfg.string() + " --out " + (dir / "out").string(), dir);
  REQUIRE(r.status == 0);
  const auto rows = csv_rows(dir / "out" / "coefficients.csv");
  REQUIRE(rows.size() == 29);
  CHECK(rows[1][1].rfind("3.14159265358979", 0) == 0);
}

TEST_CASE("runs are bit-identical") {
  const fs::path dir = scratch("determinism");
  const std::string cfg = config("poly_branch2");
  REQUIRE(ifit("run " + cfg + " --out " + (dir / "a").string(), dir).status == 0);
  REQUIRE(ifit("run " + cfg + " --threads 3 --out " + (dir / "b").string(), dir).status == 0);
  CHECK(slurp(dir / "a" / "coefficients.csv") == slurp(dir / "b" / "coefficients.csv"));
  CHECK(slurp(dir / "a" / "surface.csv") == slurp(dir / "b" / "surface.csv"));
}

TEST_CASE("malformed config: exit 1 and no outputs") {
  const fs::path dir = scratch("malformed");
  const fs::path cfg = write_config(dir, "bad.cfg", "[problem]\nlabel = \"bad\"\nmode = polynomial\n");
  const Result r = ifit("run " + cfg.string() + " --out " + (dir / "out").string(), dir);
  CHECK(r.status == 1);
  CHECK(r.output.find("bad.cfg:3:") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("hard error during a fit leaves no outputs") {
  const fs::path dir = scratch("hard");
  const fs::path cfg = write_config(dir, "h.cfg", single("y - log(x)", "[-1, 1]", "[-5, 5]", "N = 3"));
  const Result r = ifit("run " + cfg.string() + " --force --out " + (dir / "out").string(), dir);
  CHECK(r.status == 1);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("verify exit codes") {
  const fs::path dir = scratch("verify");
  const Result sphere = ifit("verify " + config("sphere"), dir);
  CHECK(sphere.status == 0);
  CHECK(sphere.output.find("clean") != std::string::npos);

  const fs::path two = write_config(dir, "two.cfg", single("y^2 - 1", "[-1, 1]", "[-2, 2]", "N = 2"));
  const Result bad = ifit("verify " + two.string(), dir);
  CHECK(bad.status == 2);
  CHECK(bad.output.find("sections_checked = 64\nviolations = 64\n") != std::string::npos);
  CHECK(bad.output.find("sign_changes = 2") != std::string::npos);

  const fs::path lin = write_config(dir, "y.cfg", single("y", "[-1, 1]", "[-1, 1]", "N = 2"));
  CHECK(ifit("verify " + lin.string(), dir).status == 0);

  CHECK(ifit("verify " + config("nondege"), dir).status == 0);
}

TEST_CASE("run refuses a failed verification unless forced") {
  const fs::path dir = scratch("force");
  const fs::path cfg = write_config(dir, "f.cfg", single("y - x", "[0, 2]", "[-1, 1]", "N = 2"));
  const Result refused = ifit("run " + cfg.string() + " --out " + (dir / "out").string(), dir);
  CHECK(refused.status == 2);
  CHECK_FALSE(fs::exists(dir / "out"));
  const Result forced = ifit("run " + cfg.string() + " --force --out " + (dir / "out").string(), dir);
  CHECK(forced.status == 0);
  CHECK(fs::exists(dir / "out" / "coefficients.csv"));
  CHECK(slurp(dir / "out" / "report.txt").find("clamped_sections = ") != std::string::npos);
}

TEST_CASE("bench writes one row per repetition") {
  const fs::path dir = scratch("bench");
  const fs::path cfg = write_config(dir, "b.cfg",
                                    single("x^2 + y^2 + z^2 - 1", "[[-0.5, 0.5], [-0.5, 0.5]]", "[0, 1.5]",
                                           "schedule = [6]", "analytic", "[\"x\", \"y\"]", "[\"z\"]"));
  const Result r = ifit("bench " + cfg.string() + " --reps 3 --threads 2 --out " + (dir / "out").string(), dir);
  REQUIRE(r.status == 0);
  const auto rows = csv_rows(dir / "out" / "bench.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].back() == "speedup");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][0] == std::to_string(i));
    CHECK(rows[i][1] == "2");
    CHECK(std::stod(rows[i].back()) > 0.0);
  }
}

TEST_CASE("empty schedule is a usage error") {
  const fs::path dir = scratch("empty");
  const fs::path cfg = write_config(dir, "e.cfg", single("y - x", "[0, 1]", "[-1, 2]", "schedule = []", "analytic"));
  const Result r = ifit("bench " + cfg.string() + " --out " + (dir / "out").string(), dir);
  CHECK(r.status == 1);
  CHECK(r.output.find("schedule is empty") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("command line errors") {
  const fs::path dir = scratch("usage");
  CHECK(ifit("", dir).status == 1);
  CHECK(ifit("frobnicate x.cfg", dir).status == 1);
  CHECK(ifit("run", dir).status == 1);
  CHECK(ifit("run /nonexistent.cfg", dir).status == 1);
  CHECK(ifit("--help", dir).status == 0);
}

TEST_CASE("system run writes per-stage tables and a manifest") {
  const fs::path dir = scratch("system");
  const Result r = ifit("run " + config("nondege") + " --out " + (dir / "out").string(), dir);
  REQUIRE(r.status == 0);
  for (const char* f : {"stage1_coefficients.csv", "stage2_coefficients.csv", "coefficients.csv", "manifest.txt",
                        "report.txt", "surface.csv"})
    CHECK(fs::exists(dir / "out" / f));
  const std::string manifest = slurp(dir / "out" / "manifest.txt");
  CHECK(manifest.rfind("order = 1, 2\n", 0) == 0);
  const auto combined = csv_rows(dir / "out" / "coefficients.csv");
  CHECK(combined[0] == std::vector<std::string>{"stage", "exponents", "coefficient"});
  CHECK(combined.size() == 1 + 25 + 16);
  const auto surface = csv_rows(dir / "out" / "surface.csv");
  CHECK(surface[0] == std::vector<std::string>{"x1", "y1", "y2", "f1", "f2"});
}

TEST_CASE("shipped configs run") {
  const fs::path dir = scratch("shipped");
  for (const char* name : {"poly_branch1", "sphere", "kepler_e08", "kepler_e09", "dege"}) {
    CAPTURE(name);
    const Result r = ifit("run " + config(name) + " --force --out " + (dir / name).string(), dir);
    CHECK(r.status == 0);
    CHECK(fs::exists(dir / name / "coefficients.csv"));
  }
}
