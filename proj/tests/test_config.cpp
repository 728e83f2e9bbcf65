#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "ifit/config.hpp"

using namespace ifit;

namespace {

const char* kBasic = R"(# comment line
[problem]
label = "demo"   # trailing comment
mode = "polynomial"
independent = ["x", "y"]
dependent = ["z"]
equation = "z - x*y"
R = [[0, 1], [-1, 2*pi]]
I = [-10, 10]
center = [0.5, 0]

[fit]
N = 3

[tolerances]
bisect = 1e-12
quad_order = 16
seed = 7

[output]
dir = "out/demo"
surface_points = 11
)";

int error_line(const std::string& text) {
  try {
    build_run_config(parse_config_text(text, "t.cfg"));
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).rfind("t.cfg:" + std::to_string(e.line()) + ": ", 0) == 0);
    return e.line();
  }
  FAIL("expected a config error");
  return -1;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("basic config") {
  const RunConfig c = build_run_config(parse_config_text(kBasic));
  CHECK(c.label == "demo");
  CHECK(c.mode == Mode::Polynomial);
  CHECK(c.independent == std::vector<std::string>{"x", "y"});
  CHECK(c.equations == std::vector<std::string>{"z - x*y"});
  CHECK(c.R.hi(1) == 2 * M_PI);
  CHECK(c.I.dim() == 1);
  CHECK(c.I.lo(0) == -10);
  CHECK(c.N == MultiIndex{3, 3});
  CHECK(c.options.bisect_tol == 1e-12);
  CHECK(c.options.quad_order == 16);
  CHECK(c.options.seed == 7);
  CHECK(c.out_dir == "out/demo");
  CHECK(c.surface_points == 11);
}

TEST_CASE("raw values keep their lines and types") {
  const ConfigFile f = parse_config_text(kBasic);
  REQUIRE(f.sections.size() == 4);
  CHECK(f.sections[0].name == "problem");
  CHECK(f.sections[0].line == 2);
  const ConfigValue& R = f.sections[0].entries.at("R");
  CHECK(R.line == 8);
  CHECK(R.is_array());
  CHECK(f.sections[0].entries.at("label").is_string());
}

TEST_CASE("strings, bools and escapes") {
  const ConfigFile f = parse_config_text("[s]\na = \"x \\\"q\\\" # not a comment\"\nb = true\nc = []\n");
  const auto& e = f.sections[0].entries;
  CHECK(std::get<std::string>(e.at("a").data) == "x \"q\" # not a comment");
  CHECK(std::get<bool>(e.at("b").data));
  CHECK(std::get<ConfigValue::Array>(e.at("c").data).empty());
}

TEST_CASE("syntax errors carry line numbers") {
  CHECK(error_line("[problem]\nlabel = \"x\nmode = 1\n") == 2);
  CHECK(error_line("[problem\n") == 1);
  CHECK(error_line("key = 1\n") == 1);
  CHECK(error_line("[a]\n[a]\n") == 2);
  CHECK(error_line("[a]\nx = 1\nx = 2\n") == 3);
  CHECK(error_line("[a]\nx = [1, 2\n") == 2);
  CHECK(error_line("[a]\nx = 1 2\n") == 2);
  CHECK(error_line("[a]\nx = y + 1\n") == 2);
  CHECK(error_line("[a]\njust words\n") == 2);
}

TEST_CASE("semantic errors point at the offending key") {
  CHECK(error_line(replace(kBasic, "mode = \"polynomial\"", "mode = \"quantum\"")) == 4);
  CHECK(error_line(replace(kBasic, "seed = 7", "sede = 7")) == 18);
  CHECK(error_line(replace(kBasic, "center = [0.5, 0]", "center = [5, 0]")) == 10);
  CHECK(error_line(replace(kBasic, "I = [-10, 10]", "I = [10, -10]")) == 9);
  CHECK(error_line(replace(kBasic, "N = 3", "N = [3, 3, 3]")) == 13);
  CHECK(error_line(replace(kBasic, "N = 3", "N = 2.5")) == 13);
  CHECK(error_line(replace(kBasic, "equation = \"z - x*y\"", "equation = \"z - w\"")) == 7);
  CHECK(error_line(replace(kBasic, "[output]", "[outputs]")) == 20);
  CHECK(error_line(replace(kBasic, "quad_order = 16", "quad_order = 0")) == 17);
}

TEST_CASE("analytic schedule must be present and increasing") {
  const std::string analytic = replace(replace(kBasic, "\"polynomial\"", "\"analytic\""), "N = 3", "schedule = [2, 4]");
  CHECK(build_run_config(parse_config_text(analytic)).schedule == std::vector<int>{2, 4});
  CHECK(error_line(replace(analytic, "schedule = [2, 4]", "schedule = []")) == 13);
  CHECK(error_line(replace(analytic, "schedule = [2, 4]", "schedule = [4, 2]")) == 13);
  CHECK(error_line(replace(analytic, "schedule = [2, 4]", "N = 3")) == 12);
}

TEST_CASE("system config with stages") {
  const char* text = R"([problem]
mode = "system"
independent = ["x"]
dependent = ["y", "z"]
equations = ["y - x", "z - y"]
R = [0, 1]
I = [[-1, 2], [-1, 2]]

[fit]
order = [2, 1]

[stage 1]
N = 3
center = [0.25]

[stage 2]
N = [2, 3]
analytic = true
R = [[0, 0.5]]
)";
  const RunConfig c = build_run_config(parse_config_text(text));
  CHECK(c.mode == Mode::System);
  CHECK(c.order == std::vector<int>{1, 0});
  REQUIRE(c.stages.size() == 2);
  CHECK(*c.stages[0].N == MultiIndex{3});
  CHECK(*c.stages[0].center == std::vector<double>{0.25});
  CHECK(c.stages[1].analytic);
  CHECK(c.stages[1].R->hi(0) == 0.5);

  CHECK(error_line(replace(text, "[stage 2]", "[stage 3]")) == 16);
  CHECK(error_line(replace(text, "order = [2, 1]", "order = [2, 3]")) == 10);
  CHECK(error_line(replace(text, "R = [0, 1]", "R = [0, 1]\ncenter = [0.5]")) == 7);
}

TEST_CASE("shipped configs load") {
  for (const char* name : {"poly_branch1", "poly_branch2", "sphere", "kepler_e08", "kepler_e09", "kepler_e10",
                           "nondege", "dege"}) {
    CAPTURE(name);
    const RunConfig c = load_config(std::string(IFIT_CONFIG_DIR) + "/" + name + ".cfg");
    CHECK(c.label == name);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), Error);
}
