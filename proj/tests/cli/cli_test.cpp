#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "config.hpp"
#include "curvrig/mesh_io.hpp"
#include "runner.hpp"

using namespace curvrig::cli;
namespace fs = std::filesystem;

namespace {

ConfigFile parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.ini");
}

int config_error_line(const std::string& text) {
  try {
    (void)validate_config(parse(text));
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string config_error(const std::string& text) {
  try {
    (void)validate_config(parse(text));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

ScenarioConfig single(const std::string& text) {
  const auto rc = validate_config(parse(text));
  REQUIRE(rc.scenarios.size() == 1);
  return rc.scenarios.front();
}

std::string render(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  write_report(out, rows);
  return out.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("curvrig-cli-test-" + name);
  fs::remove_all(dir);
  return dir;
}

const char* kCapCertificate = R"(
[cap]
kind = certificate
n = 3
domain = cap(1.2)
R_bar = round-sphere:3
)";

}  // namespace

TEST_CASE("parse_config: sections, globals and comments") {
  const auto f = parse(R"(# leading comment
seed = 11   ; trailing comment

[a]
kind = certificate
n = 3

[b]  # another
kind = quotient
)");
  REQUIRE(f.globals.count("seed"));
  CHECK(f.globals.at("seed").value == "11");
  CHECK(f.globals.at("seed").line == 2);
  REQUIRE(f.sections.size() == 2);
  CHECK(f.sections[0].id == "a");
  CHECK(f.sections[0].line == 4);
  CHECK(f.sections[0].entries.at("n").value == "3");
  CHECK(f.sections[0].entries.at("n").line == 6);
  CHECK(f.sections[1].id == "b");
  CHECK(f.sections[1].line == 8);
}

TEST_CASE("parse_config: structural errors carry line numbers") {
  const auto line_of = [](const std::string& text) {
    try {
      (void)parse(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("[a]\nkind = bvp\nkind = bvp\n") == 3);
  CHECK(line_of("[a]\nn = 3\n[a]\n") == 3);
  CHECK(line_of("[a]\nn 3\n") == 2);
  CHECK(line_of("\n\n[a\n") == 3);
  CHECK(line_of("[bad id]\n") == 1);
  CHECK(line_of("[a]\n= 3\n") == 2);
  CHECK(line_of("colour = red\n[a]\n") == 1);

  try {
    (void)parse("[a]\nn = 3\nn = 4\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()) == "test.ini:3: duplicate key 'n'");
  }
}

TEST_CASE("validate: missing and malformed fields") {
  CHECK(config_error_line("[x]\nkind = certificate\ndomain = cap(1.2)\n") == 1);
  CHECK(config_error("[x]\nkind = certificate\ndomain = cap(1.2)\n").find("missing required key 'n'") !=
        std::string::npos);
  CHECK(config_error_line("[x]\nkind = certificate\nn = 3\ndomain = cap(1.2)\nbogus = 1\n") == 5);
  CHECK(config_error_line("[x]\nkind = teapot\nn = 3\n") == 2);
  CHECK(config_error_line("[x]\nkind = certificate\nn = three\ndomain = cap(1)\n") == 3);
  CHECK(config_error_line("[x]\nkind = certificate\nn = 3\ndomain = cap(2)\n") == 4);
  CHECK(config_error_line("[x]\nkind = certificate\nn = 3\ndomain = cap(1, 2)\n") == 4);
  CHECK(config_error_line("[x]\nkind = certificate\nn = 3\ndomain = donut(1)\n") == 4);
  CHECK(config_error_line("[x]\nkind = certificate\nn = 3\ndomain = cap(1)\nnodes = 8\n") == 5);
  CHECK(config_error_line("[x]\nkind = certificate\nn = 3\ndomain = cap(1)\nR_bar = hot\n") == 5);
  CHECK(config_error_line("[x]\nkind = certificate\nn = 3\ndomain = cap(1)\neigen_tolerance = -1\n") == 5);
  CHECK(config_error_line("[x]\nkind = certificate\nn = 3\ndomain = sphere\n") == 4);
  CHECK(config_error_line("[x]\nkind = certificate\nn = 3\ndomain = cap(1)\nexpect = maybe\n") == 5);
  CHECK(config_error_line("[x]\nkind = certificate\ncriterion = sobolev\nn = 3\ndomain = annulus(1, 2)\nQ = estimate\n") == 6);
  CHECK(config_error_line("[x]\nkind = certificate\ncriterion = einstein-volume\nn = 4\ndomain = ball(1)\n") == 1);
  CHECK(config_error_line("[x]\nkind = bvp\nn = 2\ndomain = cap(1)\n") == 3);
  CHECK(config_error_line("[x]\nkind = bvp\nn = 3\ndomain = sphere\n") == 4);
  CHECK(config_error_line("[x]\nkind = bvp\nn = 3\ndomain = cube(2)\nboundary = pair\n") == 5);
  CHECK(config_error_line("[x]\nkind = annulus-scan\nn = 3\ninner = 1\nratios = 2, 1.5\nR_target = constant:6\n") == 5);
  CHECK(config_error_line("[x]\nkind = annulus-scan\nn = 3\ninner = 1\nratios = 1.5\nR_target = constant:6\nslope_count = 100\n") == 7);
  CHECK(config_error_line("[x]\nkind = annulus-scan\nn = 3\ninner = 1\nratios = 1.5, 2\nR_target = constant:6\nexpect_count = 1\n") == 7);
  CHECK(config_error_line("[x]\nkind = lapse-check\nn = 2\ndomain = ball(1)\n") == 1);
  CHECK(config_error_line("[x]\nkind = quotient\nn = 3\ndomain = annulus(1, 2)\n") == 4);
  CHECK(config_error_line("[x]\nkind = quotient\nn = 3\ndomain = square(4)\n") == 3);
  CHECK(config_error_line("seed = -4\n[x]\nkind = quotient\nn = 3\ndomain = ball(1)\n") == 1);
  CHECK(config_error_line("seed = 4\n") == 0);
}

TEST_CASE("validate: kind-specific defaults") {
  const auto c = single(kCapCertificate);
  CHECK(c.kind == ScenarioKind::certificate);
  CHECK(c.criterion == "eigenvalue");
  CHECK(c.hypothesis_equal);
  CHECK(c.nodes == 256);
  CHECK(c.R_bar == 6.0);
  CHECK(c.domain->radial.outer == 1.2);

  const auto s = single("[s]\nkind = certificate\ncriterion = sobolev\nn = 4\ndomain = ball(0.5)\nQ = 7.5\n");
  CHECK(s.Q_value == 7.5);
  CHECK_FALSE(s.hypothesis_equal);
  CHECK(s.safety == 0.9);

  const auto b = single("[b]\nkind = bvp\nn = 3\ndomain = cap(pi/2)\nR_bar = round-sphere:3\n");
  CHECK(b.R_target == 6.0);
  CHECK(b.domain->radial.outer == std::numbers::pi / 2);
  CHECK_FALSE(b.pair);

  const auto a = single("[a]\nkind = annulus-scan\nn = 3\ninner = 1\nratios = 1.2, 1.4, 2\nR_target = constant:6\n");
  CHECK(a.ratios == std::vector<double>{1.2, 1.4, 2.0});
  CHECK(a.slope_min == -2.0);
  CHECK(a.slope_max == 20.0);
  CHECK(a.slope_count == 200);

  const auto q = single("[q]\nkind = quotient\nn = 3\ndomain = cube(2)\n");
  CHECK(q.domain->is_mesh);
  CHECK(q.domain->mesh.dim == 3);
}

TEST_CASE("validate: mesh files") {
  const auto dir = scratch_dir("mesh");
  fs::create_directories(dir);
  const auto path = dir / "square.mesh";
  curvrig::write_mesh(path, curvrig::unit_square_mesh(4));
  const auto c = single("[m]\nkind = certificate\nn = 2\ndomain = mesh(" + path.string() + ")\n");
  CHECK(c.domain->is_mesh);
  CHECK(c.domain->mesh.cell_count() == 32);
  CHECK(config_error_line("[m]\nkind = certificate\nn = 3\ndomain = mesh(" + path.string() + ")\n") == 3);
  CHECK(config_error_line("[m]\nkind = certificate\nn = 2\ndomain = mesh(" + (dir / "nope").string() + ")\n") == 4);
  fs::remove_all(dir);
}

TEST_CASE("parse_real and parse_curvature") {
  CHECK(parse_real("pi") == std::numbers::pi);
  CHECK(parse_real(" pi/2 ") == std::numbers::pi / 2);
  CHECK(parse_real("0.5*pi") == 0.5 * std::numbers::pi);
  CHECK(parse_real("1e-3") == 1e-3);
  CHECK_FALSE(parse_real("pi/0"));
  CHECK_FALSE(parse_real("1.2.3"));
  CHECK_FALSE(parse_real(""));
  CHECK(parse_curvature("flat") == 0.0);
  CHECK(parse_curvature("constant:-2.5") == -2.5);
  CHECK(parse_curvature("round-sphere:3") == 6.0);
  CHECK(parse_curvature("round-sphere:2") == 2.0);
  CHECK_FALSE(parse_curvature("round-sphere:1"));
  CHECK_FALSE(parse_curvature("round-sphere:2.5"));
  CHECK_FALSE(parse_curvature("constant:"));
  CHECK_FALSE(parse_curvature("curved"));
}

TEST_CASE("overrides") {
  auto f = parse("[a]\nkind = certificate\nn = 3\ndomain = cap(1)\n[b]\nkind = certificate\nn = 3\ndomain = cap(1)\n");
  apply_overrides(f, {parse_override("b.domain=cap(0.5)"), parse_override("nodes = 64")});
  const auto rc = validate_config(f);
  CHECK(rc.scenarios[0].domain->radial.outer == 1.0);
  CHECK(rc.scenarios[1].domain->radial.outer == 0.5);
  CHECK(rc.scenarios[0].nodes == 64);
  CHECK(rc.scenarios[1].nodes == 64);

  CHECK_THROWS_AS(apply_overrides(f, {parse_override("c.n=4")}), ConfigError);
  CHECK_THROWS_AS(parse_override("novalue"), ConfigError);
  CHECK_THROWS_AS(parse_override("a.=3"), ConfigError);

  apply_overrides(f, {parse_override("a.n=x")});
  try {
    (void)validate_config(f);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 0);
    CHECK(std::string(e.what()).rfind("--set:0:", 0) == 0);
  }
}

TEST_CASE("emit_report: format and refusal") {
  const ReportRow row{"s", 0, "quotient", "estimate", "within-bound", {{"Q", 0.1}, {"zero", -0.0}, {"big", 1e300}}, 1.5};
  const auto text = render({row});
  CHECK(text ==
        "scenario,row,kind,label,verdict,quantities\n"
        "s,0,quotient,estimate,within-bound,Q=0.10000000000000001;zero=0;big=1.0000000000000001e+300\n");
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(render({row}) == text);

  auto bad = row;
  bad.quantities.push_back({"nan", std::nan("")});
  CHECK_THROWS_AS(render({bad}), ReportError);
  bad.quantities.back().value = INFINITY;
  CHECK_THROWS_AS(render({bad}), ReportError);
  CHECK_THROWS_AS(render({}), ReportError);

  const auto dir = scratch_dir("emit");
  fs::create_directories(dir);
  emit_report(std::vector<ReportRow>{row}, dir / "a.csv");
  emit_report(std::vector<ReportRow>{row}, dir / "b.csv");
  CHECK(slurp(dir / "a.csv") == text);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK_THROWS_AS(emit_report(std::vector<ReportRow>{bad}, dir / "c.csv"), ReportError);
  CHECK_FALSE(fs::exists(dir / "c.csv"));
  CHECK_THROWS_AS(emit_report(std::vector<ReportRow>{row}, dir / "missing" / "d.csv"), ReportError);
  fs::remove_all(dir);
}

TEST_CASE("write_outputs: a refused report leaves no files") {
  ScenarioOutcome o;
  o.id = "x";
  o.rows.push_back({"x", 0, "quotient", "estimate", "within-bound", {{"Q", std::nan("")}}, 0.0});
  o.profiles.push_back({"x-0", {"r", "u"}, {{0.0, 1.0}}});
  const auto dir = scratch_dir("refused");
  CHECK_THROWS_AS(write_outputs(std::vector<ScenarioOutcome>{o}, dir), ReportError);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("format_real and fnv1a") {
  CHECK(format_real(3.0) == "3");
  CHECK(format_real(-0.0) == "0");
  CHECK(format_real(1.0 / 3.0) == "0.33333333333333331");
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("run_scenario: eigenvalue certificates on round caps") {
  SUBCASE("cap(1.2) is rigid") {
    const auto o = run_scenario(single(kCapCertificate), 0);
    CHECK_FALSE(o.failed);
    REQUIRE(o.rows.size() == 1);
    const auto& r = o.rows.front();
    CHECK(r.verdict == "rigid");
    CHECK(r.label == "eigenvalue");
    REQUIRE(r.quantities.size() == 5);
    CHECK(r.quantities[0].name == "lhs");
    CHECK(r.quantities[0].value == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.quantities[2].name == "margin");
    CHECK(r.quantities[2].value > 0.0);
    CHECK(r.quantities[3].name == "lambda1");
    CHECK(r.quantities[3].value > 3.0);
    REQUIRE(o.certificates.size() == 1);
    CHECK(o.certificates[0].domain == "cap(1.2)/n=3/m=256");
  }
  SUBCASE("the hemisphere is inconclusive") {
    const auto o = run_scenario(
        single("[h]\nkind = certificate\nn = 3\ndomain = cap(pi/2)\nnodes = 512\nR_bar = round-sphere:3\n"), 0);
    REQUIRE(o.rows.size() == 1);
    CHECK(o.rows[0].verdict == "inconclusive");
    CHECK(std::abs(o.rows[0].quantities[2].value) < 1e-3);
  }
  SUBCASE("a wrong expectation fails the scenario") {
    const auto o = run_scenario(single(std::string(kCapCertificate) + "expect = inconclusive\n"), 0);
    CHECK(o.failed);
    CHECK(o.failure == "expected verdict inconclusive, got rigid");
    CHECK(o.rows.size() == 1);
  }
}

TEST_CASE("run_scenario: library errors become failed rows") {
  auto c = single(kCapCertificate);
  c.eigen_max_iterations = 1;
  const auto o = run_scenario(c, 0);
  CHECK(o.failed);
  REQUIRE(o.rows.size() == 1);
  CHECK(o.rows[0].verdict == "error");
  CHECK(o.rows[0].quantities.empty());
  CHECK(o.certificates.empty());
}

TEST_CASE("run_scenario: other kinds") {
  SUBCASE("bvp on the certified cap") {
    const auto o = run_scenario(single("[b]\nkind = bvp\nn = 3\ndomain = cap(1.2)\nnodes = 128\nR_bar = round-sphere:3\n"
                                       "boundary = pair\nrandom_starts = 2\nexpect_solutions = 1\n"),
                                5);
    CHECK_FALSE(o.failed);
    REQUIRE(o.rows.size() == 7);
    CHECK(o.rows[0].label == "one");
    CHECK(o.rows[4].label == "random-0");
    CHECK(o.rows[6].label == "summary");
    CHECK(o.rows[6].verdict == "trivial");
    REQUIRE(o.profiles.size() == 1);
    CHECK(o.profiles[0].columns == std::vector<std::string>{"r", "u", "du"});
    for (const auto& row : o.profiles[0].rows) CHECK(std::abs(row[1] - 1.0) < 1e-8);
  }
  SUBCASE("annulus scan") {
    const auto o = run_scenario(
        single("[a]\nkind = annulus-scan\nn = 3\ninner = 1\nratios = 1.2, 2\nR_target = constant:6\nprofiles = false\n"), 0);
    CHECK_FALSE(o.failed);
    REQUIRE(o.rows.size() == 3);
    CHECK(o.rows[0].verdict == "count=1");
    CHECK(o.rows[1].verdict == "count=2");
    CHECK(o.rows[2].verdict == "first-multiple");
    CHECK(o.rows[2].quantities[0].value == 2.0);
    CHECK(o.profiles.empty());
  }
  SUBCASE("lapse check") {
    const auto o = run_scenario(
        single("[l]\nkind = lapse-check\nn = 2\ndomain = cap(pi/2)\nnodes = 512\nR_bar = round-sphere:2\n"), 0);
    REQUIRE(o.rows.size() == 1);
    CHECK(o.rows[0].verdict == "lapse");
    CHECK(o.rows[0].quantities[0].value < 1e-6);
    CHECK(o.rows[0].quantities[1].value == doctest::Approx(1.0).epsilon(1e-4));

    const auto z = run_scenario(
        single("[l]\nkind = lapse-check\nn = 2\ndomain = cap(1)\nR_bar = round-sphere:2\nf = zero\nresidual_max = 1\n"), 0);
    CHECK(z.rows[0].verdict == "degenerate");
    CHECK(z.failed);

    const auto even = run_scenario(
        single("[l]\nkind = lapse-check\nn = 2\ndomain = sphere\nnodes = 256\nR_bar = round-sphere:2\n"), 0);
    CHECK(even.failed);
    CHECK(even.rows[0].verdict == "error");
  }
  SUBCASE("quotient") {
    const auto o = run_scenario(single("[q]\nkind = quotient\nn = 3\ndomain = sphere\nR_bar = round-sphere:3\n"), 0);
    CHECK_FALSE(o.failed);
    CHECK(o.rows[0].verdict == "within-bound");
    CHECK(o.rows[0].quantities[0].value <= 1.02 * o.rows[0].quantities[3].value);
    REQUIRE(o.profiles.size() == 1);
    CHECK(o.profiles[0].name == "q-minimizer");
  }
}

TEST_CASE("run_all: ordering and determinism") {
  const std::string text = R"(seed = 3
[zeta]
kind = certificate
n = 3
domain = cap(1)
R_bar = round-sphere:3
[alpha]
kind = bvp
n = 3
domain = cap(1.2)
nodes = 96
R_bar = round-sphere:3
random_starts = 3
[mid]
kind = quotient
n = 3
domain = sphere
nodes = 64
R_bar = round-sphere:3
)";
  const auto rc = validate_config(parse(text));
  const auto serial = run_all(rc, 1);
  const auto parallel = run_all(rc, 4);
  REQUIRE(serial.size() == 3);
  CHECK(serial[0].id == "alpha");
  CHECK(serial[1].id == "mid");
  CHECK(serial[2].id == "zeta");

  const auto dir = scratch_dir("determinism");
  write_outputs(serial, dir / "a");
  write_outputs(parallel, dir / "b");
  write_outputs(run_all(rc, 2), dir / "c");
  for (const char* name : {"report.csv", "certificates.csv", "profiles/alpha-0.csv", "profiles/mid-minimizer.csv"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(dir / "a" / name));
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
    CHECK(slurp(dir / "a" / name) == slurp(dir / "c" / name));
  }
  fs::remove_all(dir);
}
