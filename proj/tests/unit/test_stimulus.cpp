#include <doctest.h>

#include "scripted.hpp"
#include "tbgen/errors.hpp"
#include "tbgen/interface.hpp"
#include "tbgen/stimulus.hpp"

using namespace tbgen;
using namespace tbgen::testing;

namespace {

ModuleInterface adder_iface() { return parse_verilog_interface("module add(input [3:0] a, input [3:0] b, output [4:0] s);"); }

Json scenario(const std::string& id, std::vector<Json> steps) {
  return {{"scenario", id}, {"steps", steps}};
}

Json step(const std::string& a, const std::string& b) { return {{"a", a}, {"b", b}}; }

// n distinct single-step scenarios named p0..p(n-1), values offset by `base`.
Json distinct(int n, int base) {
  Json arr = Json::array();
  for (int i = 0; i < n; ++i) {
    arr.push_back(scenario("p" + std::to_string(i), {step(format_bitvector(bv(4, static_cast<unsigned>(base + i))), "0000")}));
  }
  return arr;
}

struct Rig {
  TempDir dir;
  Settings settings;
  std::shared_ptr<ScriptedProvider> provider = std::make_shared<ScriptedProvider>();
  Gateway gateway{provider};
  FixtureBackend backend{dir / "rt"};
  AgentContext ctx{gateway, backend, settings, dir / "ws"};
  Problem problem = make_problem("add", "Add a and b.", adder_iface());
  Rig() { std::filesystem::create_directories(dir / "rt"); }
};

}  // namespace

TEST_SUITE("stimulus-agent") {

TEST_CASE("scripts with 4 and 6 scenarios merge into 10 in order") {
  auto res = merge_stimulus_outputs(adder_iface(), {{0, distinct(4, 0)}, {1, distinct(6, 4)}}, 256, 4096);
  REQUIRE(res.suite.scenarios.size() == 10);
  CHECK(res.suite.scenarios[0].id == "s0_p0");
  CHECK(res.suite.scenarios[3].id == "s0_p3");
  CHECK(res.suite.scenarios[4].id == "s1_p0");
  CHECK(res.suite.scenarios[9].steps[0].assignments.at("a") == bv(4, 9));
}

TEST_CASE("identical scenarios from two scripts are kept once") {
  Json one = Json::array({scenario("x", {step("0001", "0010")})});
  auto res = merge_stimulus_outputs(adder_iface(), {{0, one}, {1, one}}, 256, 4096);
  CHECK(res.suite.scenarios.size() == 1);
}

TEST_CASE("a width violation drops only the offending scenario") {
  Json doc = Json::array({scenario("bad", {step("10000", "0000")}), scenario("good", {step("0001", "0000")})});
  auto res = merge_stimulus_outputs(adder_iface(), {{0, doc}}, 256, 4096);
  REQUIRE(res.suite.scenarios.size() == 1);
  CHECK(res.suite.scenarios[0].id == "s0_good");
  REQUIRE_FALSE(res.notes.empty());
  CHECK(res.notes[0].find("dropped") != std::string::npos);
}

TEST_CASE("missing inputs hold their previous value") {
  Json doc = Json::array({scenario("hold", {Json{{"a", "0011"}}, Json{{"b", "0001"}}, Json::object()})});
  auto res = merge_stimulus_outputs(adder_iface(), {{0, doc}}, 256, 4096);
  const auto& steps = res.suite.scenarios.at(0).steps;
  CHECK(steps[0].assignments.at("b") == bv(4, 0));
  CHECK(steps[1].assignments.at("a") == bv(4, 3));
  CHECK(steps[2].assignments.at("a") == bv(4, 3));
  CHECK(steps[2].assignments.at("b") == bv(4, 1));
}

TEST_CASE("clock keys are ignored and outputs are rejected") {
  auto iface = parse_verilog_interface("module c(input clk, input reset, output q);");
  Json doc = Json::array({scenario("c", {Json{{"clk", "1"}, {"reset", "1"}}}),
                          scenario("o", {Json{{"q", "1"}}})});
  auto res = merge_stimulus_outputs(iface, {{0, doc}}, 256, 4096);
  REQUIRE(res.suite.scenarios.size() == 1);
  CHECK(res.suite.scenarios[0].steps[0].assignments.count("clk") == 0);
  CHECK(res.notes.size() == 2);
}

TEST_CASE("ids are sanitized and made unique") {
  Json doc = Json::array({scenario("a b/c", {step("0001", "0000")}), scenario("a b/c", {step("0010", "0000")}),
                          Json{{"steps", Json::array({step("0011", "0000")})}}});
  auto res = merge_stimulus_outputs(adder_iface(), {{2, doc}}, 256, 4096);
  REQUIRE(res.suite.scenarios.size() == 3);
  CHECK(res.suite.scenarios[0].id == "s2_a_b_c");
  CHECK(res.suite.scenarios[1].id == "s2_a_b_c_2");
  CHECK(res.suite.scenarios[2].id == "s2_scn2");
}

TEST_CASE("caps truncate the suite") {
  auto res = merge_stimulus_outputs(adder_iface(), {{0, distinct(10, 0)}}, 3, 4096);
  CHECK(res.suite.scenarios.size() == 3);
  CHECK(res.notes.back().find("truncated") != std::string::npos);
  Json longer = Json::array({scenario("l", {step("0001", "0000"), step("0010", "0000"), step("0011", "0000")}),
                             scenario("m", {step("0100", "0000")})});
  res = merge_stimulus_outputs(adder_iface(), {{0, longer}}, 256, 2);
  REQUIRE(res.suite.scenarios.size() == 1);
  CHECK(res.suite.scenarios[0].steps.size() == 2);
}

TEST_CASE("non-list outputs and empty scenarios are noted") {
  auto res = merge_stimulus_outputs(adder_iface(), {{0, Json(5)}, {1, Json::array({scenario("e", {})})}}, 256, 4096);
  CHECK(res.suite.scenarios.empty());
  CHECK(res.notes.size() == 2);
}

TEST_CASE("scenario plan is persisted and an empty spec issues no call") {
  Rig rig;
  rig.provider->on(Agent::scenario, [](const PromptBundle&, int) { return "1. plan"; });
  auto plan = design_scenarios(rig.problem, rig.ctx);
  CHECK(plan.text == "1. plan");
  CHECK(read_text_file(rig.dir / "ws/Testcase_Desc.txt") == "1. plan");
  auto blank = rig.problem;
  blank.spec_text = "  ";
  CHECK_THROWS_AS(design_scenarios(blank, rig.ctx), BadProblem);
  CHECK(rig.provider->calls(Agent::scenario) == 1);
}

TEST_CASE("k samples become k scripts and unfenced samples are dropped") {
  Rig rig;
  rig.provider->on(Agent::stimulus, [](const PromptBundle&, int i) {
    return i == 1 ? std::string("no code here") : fenced("python", "gen " + std::to_string(i));
  });
  auto scripts = generate_stimulus_scripts(rig.problem, {"plan"}, rig.settings.stimulus_samples, rig.ctx);
  CHECK(rig.settings.stimulus_samples == 3);
  REQUIRE(scripts.size() == 2);
  CHECK(scripts[0].sample_index == 0);
  CHECK(scripts[1].sample_index == 2);
  CHECK(scripts[1].source == "gen 2");
  auto log = rig.provider->log();
  REQUIRE_FALSE(log.empty());
  CHECK(log[0].prompt.user.find("plan") != std::string::npos);
  CHECK(log[0].prompt.user.find("| a | input | 4 |") != std::string::npos);
  CHECK(log[0].prompt.few_shots.size() == 1);

  rig.provider->on(Agent::stimulus, [](const PromptBundle&, int) { return std::string("nothing"); });
  CHECK_THROWS_AS(generate_stimulus_scripts(rig.problem, {"plan"}, 3, rig.ctx), StimulusGenError);
}

TEST_CASE("collect runs each script and discards failures") {
  Rig rig;
  write_stimulus_fixture(rig.dir / "rt", "one", distinct(2, 0));
  write_stimulus_fixture(rig.dir / "rt", "two", distinct(1, 5));
  write_text_file(FixtureBackend::stimulus_path(rig.dir / "rt", "junk"), "not json");
  auto suite = collect_stimuli({{"one", 0}, {"crash", 1}, {"junk", 2}, {"two", 3}}, rig.problem.interface, rig.ctx);
  REQUIRE(suite.scenarios.size() == 3);
  CHECK(suite.scenarios[2].id == "s3_p0");
  auto back = stimulus_from_json(read_json_file(rig.dir / "ws/Input_signal.json"), rig.problem.interface);
  CHECK(back == suite);
  CHECK(read_text_file(rig.dir / "ws/stimulus/Stimuli_Gen_1.py") == "crash");
  CHECK_THROWS_AS(collect_stimuli({{"crash", 0}}, rig.problem.interface, rig.ctx), StimulusGenError);
}

}
