#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "qwalk/checks.hpp"
#include "qwalk/csv.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/scenario.hpp"
#include "qwalk/verify.hpp"

using namespace qwalk;
namespace fs = std::filesystem;

namespace {

const std::string kMinimal = R"(name: tiny
walk:
  family: homogeneous
  params: [0.3, 0.7]
loops:
  - {site: 0, mass: 0.5, take_from: right}
truncation: [20, 40]
horizon: 200
initial_state:
  kind: arc
  site: 0
  direction: R
checks: [recurrence_class, lift_residual, hs_dimension]
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  return s.replace(at, from.size(), to);
}

ConfigError parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected a config error");
  return ConfigError("", 0, "");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QWLAB_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qwalk-scenario-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  const ScenarioConfig c = parse_config(kMinimal);
  CHECK(c.name == "tiny");
  CHECK(c.truncation == std::vector<std::size_t>{20, 40});
  CHECK(c.horizon == std::vector<std::size_t>{200});
  CHECK(c.output.directory == "tiny");
  CHECK(c.tolerance("closed_form") == 1e-2);
  CHECK(c.loops.size() == 1);
}

TEST_CASE("round trip parse serialize parse") {
  ScenarioConfig c = parse_config(kMinimal);
  c.initial_state.kind = "custom";
  c.initial_state.coefficients = {{0.0, 0.0}, {0.25, -0.5}, {1.0 / 3.0, 0.1}};
  c.tolerances["two_method"] = 0.123456789012345678;
  c.walk.declared_class = RecurrenceClass::positive_recurrent;
  const ScenarioConfig again = parse_config(serialize_config(c));
  CHECK(again == c);
}

TEST_CASE("bundled scenarios parse, round trip, and mirror the registry") {
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(QWLAB_SCENARIO_DIR)) {
    if (e.path().extension() != ".yaml") continue;
    const ScenarioConfig c = load_config(e.path().string());
    CAPTURE(c.name);
    CHECK(e.path().stem().string() == c.name);
    CHECK(parse_config(serialize_config(c)) == c);
    names.insert(c.name);
    bool found = false;
    for (const auto& b : bundled_walks()) {
      if (b.name != c.name) continue;
      found = true;
      CHECK(b.family == c.walk.family);
      CHECK(b.params == c.walk.params);
      CHECK(b.loops == c.loops);
    }
    CHECK(found);
  }
  CHECK(names.size() == bundled_walks().size());
}

TEST_CASE("schema violations report field and line") {
  SUBCASE("loop mass above one") {
    const auto e = parse_error(replace(kMinimal, "mass: 0.5", "mass: 1.5"));
    CHECK(e.field() == "loops[0].mass");
    CHECK(e.line() == 6);
  }
  SUBCASE("unknown key") {
    const auto e = parse_error(kMinimal + "colour: blue\n");
    CHECK(e.field() == "colour");
    CHECK(e.line() == 14);
  }
  SUBCASE("unknown family") {
    const auto e = parse_error(replace(kMinimal, "family: homogeneous", "family: comb"));
    CHECK(e.field() == "walk");
    CHECK(e.line() == 3);
  }
  SUBCASE("truncation too short for the loops") {
    const auto e = parse_error(replace(replace(kMinimal, "site: 0, mass: 0.5, take_from: right", "site: 19, mass: 0.5, take_from: proportional"),
                "[20, 40]", "[20]"));
    CHECK(e.field() == "truncation");
  }
  SUBCASE("anchor beyond N") {
    const auto e = parse_error(replace(kMinimal, "  site: 0\n", "  site: 25\n"));
    CHECK(e.field() == "initial_state.site");
  }
  SUBCASE("custom state with zero coefficients") {
    const auto e = parse_error(
        replace(kMinimal, "  kind: arc\n", "  kind: custom\n  coefficients: [[0, 0], [0, 0], [0, 0]]\n"));
    CHECK(e.field() == "initial_state.coefficients");
  }
  SUBCASE("loop mass infeasible for the side it is taken from") {
    const auto e = parse_error(replace(kMinimal, "site: 0, mass: 0.5, take_from: right", "site: 5, mass: 0.5, take_from: right"));
    CHECK(e.field() == "loops[0]");
    CHECK(e.line() == 6);
  }
  SUBCASE("unknown check") {
    const auto e = parse_error(replace(kMinimal, "hs_dimension", "hs_dimensions"));
    CHECK(e.field() == "checks[2]");
  }
  SUBCASE("message names line and field") {
    const auto e = parse_error(replace(kMinimal, "mass: 0.5", "mass: 1.5"));
    CHECK(std::string(e.what()).find("line 6") != std::string::npos);
    CHECK(std::string(e.what()).find("loops[0].mass") != std::string::npos);
  }
}

TEST_CASE("every configured check appears once in the report") {
  const fs::path out = scratch("report");
  RunOptions opts;
  opts.output_root = out.string();
  const ScenarioConfig c = parse_config(kMinimal);
  const ScenarioResult r = run_scenario(c, opts);
  REQUIRE(r.checks.size() == c.checks.size());
  CHECK(r.passed());
  const std::string report = slurp(out / "tiny" / "report.txt");
  for (const auto& name : c.checks) {
    const std::string tag = "check " + name + " ";
    const auto first = report.find(tag);
    CHECK(first != std::string::npos);
    CHECK(report.find(tag, first + 1) == std::string::npos);
  }
  CHECK(fs::exists(out / "tiny" / "measure.csv"));
  CHECK(fs::exists(out / "tiny" / "spectral.csv"));
  fs::remove_all(out);
}

TEST_CASE("identical configs give byte-identical artifacts") {
  const fs::path a = scratch("det-a"), b = scratch("det-b");
  for (const auto& root : {a, b}) {
    RunOptions opts;
    opts.output_root = root.string();
    run_scenario(parse_config(kMinimal), opts);
  }
  for (const char* f : {"measure.csv", "spectral.csv", "report.txt"}) {
    CAPTURE(f);
    CHECK(slurp(a / "tiny" / f) == slurp(b / "tiny" / f));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("csv numbers carry fifteen significant digits") {
  CHECK(format_number(1.0 / 3.0) == "0.333333333333333");
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(2.0 / 7.0 * 1e-20) == "2.85714285714286e-21");
}

TEST_CASE("closed form scenario matches the two-loop-free prediction") {
  ScenarioConfig c = parse_config(kMinimal);
  c.loops.clear();
  c.truncation = {200};
  c.horizon = {3000};
  c.checks = {"closed_form_match", "lower_bound"};
  const ScenarioRun run = prepare_run(c);
  for (const auto& name : c.checks) {
    const CheckRecord r = run_check(name, run);
    CAPTURE(r.observed);
    CHECK(r.passed);
  }
}

TEST_CASE("inapplicable checks fail with a reason") {
  ScenarioConfig c = parse_config(kMinimal);
  c.checks = {"corollary3"};
  const ScenarioRun run = prepare_run(c);
  const CheckRecord r = run_check("corollary3", run);
  CHECK_FALSE(r.passed);
  CHECK(r.observed.find("not applicable") == 0);
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch("cli");
  const fs::path bad = dir / "bad.yaml";
  const fs::path good = dir / "good.yaml";
  std::ofstream(bad) << replace(kMinimal, "mass: 0.5", "mass: 1.5");
  std::ofstream(good) << kMinimal;
  const std::string root = "--output-root " + dir.string();
  CHECK(run_cli(root + " run " + bad.string()) == 2);
  CHECK(run_cli(root + " classify " + bad.string()) == 2);
  CHECK(run_cli(root + " run " + good.string()) == 0);
  CHECK(fs::exists(dir / "tiny" / "report.txt"));
  CHECK(run_cli(root + " classify " + good.string()) == 0);
  CHECK(run_cli(root + " spectrum " + good.string()) == 0);
  CHECK(run_cli(root + " measure " + good.string()) == 0);
  CHECK(run_cli(root + " sweep " + good.string()) == 0);
  CHECK(fs::exists(dir / "tiny" / "sweep.csv"));
  CHECK(run_cli("verify --list") == 0);
  CHECK(run_cli("verify --filter nowhere") == 2);

  // A failing check gives exit 1.
  std::ofstream(good) << replace(kMinimal, "checks: [", "checks: [corollary3, ");
  CHECK(run_cli(root + " run " + good.string()) == 1);
  fs::remove_all(dir);
}

TEST_CASE("output root comes from the environment when no flag is given") {
  const fs::path dir = scratch("env");
  const fs::path good = dir / "good.yaml";
  std::ofstream(good) << kMinimal;
  const std::string cmd = "QWLAB_OUTPUT_ROOT=" + dir.string() + " " + QWLAB_BINARY + " measure " + good.string() +
                          " > /dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(dir / "tiny" / "measure.csv"));
  fs::remove_all(dir);
}

TEST_CASE("criterion registry") {
  const auto& list = list_criteria();
  REQUIRE(list.size() == 10);
  for (std::size_t k = 0; k < list.size(); ++k) CHECK(list[k].id == int(k + 1));
  std::set<std::string> modules;
  for (const auto& c : list) modules.insert(c.module);
  CHECK(modules == std::set<std::string>{"rw-model", "arc-space", "spectral", "measures", "scenario-cli"});
}

TEST_CASE("module filter restricts the suite") {
  VerifyOptions opts;
  opts.module_filter = "rw-model";
  const VerifyReport r = verify_all(opts);
  REQUIRE(r.criteria.size() == 1);
  CHECK(r.criteria[0].info.id == 5);
  CHECK(r.text.find("criterion 5 ") != std::string::npos);
}
