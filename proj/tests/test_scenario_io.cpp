#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "formctl/scenario.hpp"
#include "formctl/trace_io.hpp"

using namespace formctl;

namespace {

// minimal but complete scenario text used as the mutation baseline
const char* kBase = R"(
[formation]
flavor = distance
agents = 3
dimension = 2
edge = 1 2 1.0
edge = 2 3 1.0
edge = 3 1 1.0
reference = 0 0  1 0  0.5 0.86602540378443865

[model]
kind = planar2
gravity = horizontal

[agent 1]
base = 0 0
q0 = 0.5 1.0

[agent 2]
base = 3 0
q0 = 2.0 1.0

[agent 3]
base = 1.5 3
q0 = 4.0 1.0

[controller]
variant = exact
kp = 10
kd = 5

[simulation]
dt = 0.001
duration = 0.1
)";

std::string replaced(const std::string& from, const std::string& to) {
  std::string s = kBase;
  auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

TEST_CASE("a complete scenario parses into the expected network") {
  Scenario sc = parse_scenario(kBase, "triangle");
  CHECK(sc.name == "triangle");
  CHECK(sc.model_kind == "planar2");
  CHECK(sc.network.graph.num_agents() == 3);
  CHECK(sc.network.graph.num_edges() == 3);
  CHECK(sc.network.graph.flavor() == Flavor::Distance);
  CHECK(sc.network.arms.size() == 3);
  CHECK(sc.network.q0[1](0) == doctest::Approx(2.0));
  CHECK(sc.network.arms[1]->base_position()(0) == doctest::Approx(3.0));
  CHECK(sc.network.controller.variant() == Variant::Exact);
  CHECK(sc.network.controller.gains().kp == doctest::Approx(10.0));
  CHECK(sc.sim.dt == doctest::Approx(1e-3));
  CHECK(sc.sim.duration == doctest::Approx(0.1));
  // grid defaults survive when no [grid] section is present
  CHECK(sc.grid.samples == 4000);
  CHECK(sc.grid.seed == 12345u);
}

TEST_CASE("the shipped scenario files load and validate") {
  for (const char* f : {"square2d.scn", "vertical4.scn", "tetra3d.scn"}) {
    std::filesystem::path p = std::filesystem::path(SCENARIO_DIR) / f;
    Scenario sc = load_scenario(p.string());
    CHECK(sc.network.graph.infinitesimally_rigid());
    CHECK(sc.network.arms.size() == (size_t)sc.network.graph.num_agents());
  }
}

TEST_CASE("parser rejects malformed input with a located message") {
  CHECK_THROWS_AS(parse_scenario("", "empty"), ScenarioError);
  CHECK_THROWS_AS(parse_scenario("[formation]\nbogus_key = 1\n", "x"), ScenarioError);
  CHECK_THROWS_AS(parse_scenario("[no_such_section]\n", "x"), ScenarioError);
  CHECK_THROWS_AS(parse_scenario("stray = 1\n", "x"), ScenarioError);

  SUBCASE("unknown controller variant") {
    CHECK_THROWS_AS(parse_scenario(replaced("variant = exact", "variant = magic"), "x"),
                    ScenarioError);
  }
  SUBCASE("duplicate scalar key") {
    CHECK_THROWS_AS(parse_scenario(replaced("kp = 10", "kp = 10\nkp = 11"), "x"),
                    ScenarioError);
  }
  SUBCASE("agent index out of range") {
    CHECK_THROWS_AS(parse_scenario(replaced("[agent 3]", "[agent 4]"), "x"), ScenarioError);
  }
  SUBCASE("edge endpoint out of range") {
    CHECK_THROWS_AS(parse_scenario(replaced("edge = 3 1 1.0", "edge = 3 5 1.0"), "x"),
                    ScenarioError);
  }
  SUBCASE("nonpositive time step") {
    CHECK_THROWS_AS(parse_scenario(replaced("dt = 0.001", "dt = -0.5"), "x"), ScenarioError);
  }
  SUBCASE("reference inconsistent with the desired distances") {
    CHECK_THROWS_AS(
        parse_scenario(replaced("reference = 0 0  1 0  0.5 0.86602540378443865",
                                "reference = 0 0  2 0  1 1.7"),
                       "x"),
        ScenarioError);
  }
  SUBCASE("gravity scale on a non-naive variant") {
    CHECK_THROWS_AS(
        parse_scenario(replaced("kd = 5", "kd = 5\nmass_scale = 0.8"), "x"), ScenarioError);
  }
  SUBCASE("parameter guess on the exact variant") {
    CHECK_THROWS_AS(parse_scenario(replaced("kd = 5", "kd = 5\nahat0 = 2 2"), "x"),
                    ScenarioError);
  }
  SUBCASE("wrong arity in a vector value") {
    CHECK_THROWS_AS(parse_scenario(replaced("base = 3 0", "base = 3 0 1"), "x"),
                    ScenarioError);
  }
  SUBCASE("error message carries the file name") {
    try {
      parse_scenario(replaced("variant = exact", "variant = magic"), "myfile.scn");
      FAIL("expected a throw");
    } catch (const ScenarioError& e) {
      CHECK(std::string(e.what()).find("myfile.scn") != std::string::npos);
    }
  }
}

TEST_CASE("missing scenario file raises a scenario error") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/path.scn"), ScenarioError);
}

TEST_CASE("traces round-trip through the CSV files at full precision") {
  Scenario sc = parse_scenario(kBase, "triangle");
  RunResult res = simulate(sc.network, sc.sim);
  REQUIRE_FALSE(res.blew_up);

  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "formctl_trace_roundtrip";
  std::filesystem::remove_all(dir);
  write_trace(dir.string(), res);
  for (const char* f : {"positions.csv", "errors.csv", "joints.csv", "controls.csv",
                        "diagnostics.csv", "summary.txt"})
    CHECK(std::filesystem::exists(dir / f));

  Trace tr = read_trace(dir.string());
  REQUIRE(tr.t.size() == res.trace.t.size());
  CHECK(tr.num_agents == 3);
  CHECK(tr.num_edges == 3);
  double worst = 0;
  for (size_t k = 0; k < tr.t.size(); ++k) {
    worst = std::max(worst, (tr.q[k] - res.trace.q[k]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (tr.x[k] - res.trace.x[k]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (tr.e[k] - res.trace.e[k]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (tr.u[k] - res.trace.u[k]).cwiseAbs().maxCoeff());
  }
  CHECK(worst == 0.0);  // 17 significant digits reproduce doubles exactly

  std::filesystem::path plots = dir / "plots";
  write_plots(plots.string(), tr);
  for (const char* f : {"paths.svg", "errors.svg", "joints.svg"})
    CHECK(std::filesystem::exists(plots / f));
  std::filesystem::remove_all(dir);
}
