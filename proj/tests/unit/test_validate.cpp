#include <doctest.h>

#include "counter_rig.hpp"
#include "random_signals.hpp"
#include "scripted.hpp"
#include "tbgen/codegen.hpp"
#include "tbgen/errors.hpp"
#include "tbgen/validate.hpp"

using namespace tbgen;
using namespace tbgen::testing;

namespace {

SimOutcome failed_with(std::vector<TraceDiff> diffs, std::size_t count = 0) {
  SimOutcome o;
  o.passed = false;
  o.failure_count = count ? count : diffs.size();
  o.mismatches = std::move(diffs);
  return o;
}

Problem q_problem(const std::string& header) {
  return make_problem("p", "spec", parse_verilog_interface(header));
}

}  // namespace

TEST_SUITE("sim-validate") {

TEST_CASE("mismatch lines parse back to diffs") {
  auto d = parse_mismatch_line("MISMATCH scenario=s0_a step=12 signal=q expected=1000 actual=0001");
  REQUIRE(d);
  CHECK(d->scenario_id == "s0_a");
  CHECK(d->step_index == 12);
  CHECK(d->signal == "q");
  CHECK(d->expected == bv(4, 8));
  CHECK(d->actual == bv(4, 1));
  CHECK_FALSE(parse_mismatch_line("MISMATCH scenario=a step=1 signal=q expected=10 actual=1"));
  CHECK_FALSE(parse_mismatch_line("MISMATCH scenario=a step=x signal=q expected=1 actual=1"));
  CHECK_FALSE(parse_mismatch_line("mismatch scenario=a step=1 signal=q expected=1 actual=1"));
  CHECK_FALSE(parse_mismatch_line("MISMATCH scenario=a step=1 signal=q expected=12 actual=10"));
}

TEST_CASE("emitted mismatch lines invert exactly") {
  SignalRng rng(5);
  for (int i = 0; i < 300; ++i) {
    auto d = rng.diff();
    auto back = parse_mismatch_line(format_mismatch_line(d));
    REQUIRE(back);
    CHECK(*back == d);
  }
}

TEST_CASE("simulator output is read through the result protocol") {
  auto pass = parse_sim_output("hello\nRESULT: PASS\n", 0);
  CHECK(pass.passed);
  CHECK(pass.mismatches.empty());
  auto fail = parse_sim_output(
      "MISMATCH scenario=s step=0 signal=y expected=101 actual=100\nRESULT: FAIL failures=1\n", 1);
  CHECK_FALSE(fail.passed);
  CHECK(fail.failure_count == 1);
  REQUIRE(fail.mismatches.size() == 1);
  CHECK(fail.mismatches[0].signal == "y");
  auto capped = parse_sim_output("MISMATCH scenario=s step=0 signal=y expected=1 actual=0\nRESULT: FAIL failures=9\n", 1);
  CHECK(capped.failure_count == 9);
}

TEST_CASE("protocol violations") {
  CHECK_THROWS_AS(parse_sim_output("", 0), ProtocolError);
  CHECK_THROWS_AS(parse_sim_output("RESULT: PASS\nRESULT: PASS\n", 0), ProtocolError);
  CHECK_THROWS_AS(parse_sim_output("RESULT: PASS\n", 1), ProtocolError);
  CHECK_THROWS_AS(parse_sim_output("RESULT: FAIL failures=1\nMISMATCH scenario=s step=0 signal=y expected=1 actual=0\n", 0), ProtocolError);
  CHECK_THROWS_AS(parse_sim_output("RESULT: FAIL failures=0\n", 1), ProtocolError);
  CHECK_THROWS_AS(parse_sim_output("MISMATCH scenario=s step=0 signal=y expected=1 actual=0\nRESULT: PASS\n", 0), ProtocolError);
  CHECK_THROWS_AS(parse_sim_output("MISMATCH bogus\nRESULT: FAIL failures=1\n", 1), ProtocolError);
  CHECK_THROWS_AS(parse_sim_output("RESULT: FAIL failures=1\n", 139), ProtocolError);
}

TEST_CASE("missing simulator is an environment error") {
  CHECK_THROWS_AS(probe_simulator("/nonexistent/verilator"), EnvironmentError);
}

TEST_CASE("report sentence carries binary and decimal values") {
  auto problem = q_problem("module m(input clk, input [3:0] d, output [3:0] q);");
  auto r = render_report(failed_with({{"s0_mid", 2, "q", bv(4, 8), bv(4, 1)}}), {"1. mid - check the middle\n"}, problem);
  CHECK(r.narrative.find("In scenario s0_mid (1. mid - check the middle), at step 2, output q was expected to be "
                         "1000 (8) but the design produced 0001 (1).") != std::string::npos);
  CHECK(r.scenario_notes.at("s0_mid") == "1. mid - check the middle");
  CHECK(r.narrative.find("reg [4:1] q = 4'b1000") != std::string::npos);
  CHECK(r.mismatches.size() == 1);
}

TEST_CASE("consecutive steps are grouped into one range sentence") {
  auto problem = q_problem("module m(input clk, input [3:0] d, output [3:0] q);");
  std::vector<TraceDiff> diffs;
  for (std::size_t k = 3; k < 13; ++k) diffs.push_back({"s0_x", k, "q", bv(4, k % 16), bv(4, 0)});
  diffs.push_back({"s0_x", 20, "q", bv(4, 1), bv(4, 0)});
  auto r = render_report(failed_with(diffs), {""}, problem);
  CHECK(r.narrative.find("at steps 3 through 12, output q differed from the expected value in all 10 steps") != std::string::npos);
  CHECK(r.narrative.find("at step 20, output q") != std::string::npos);
  std::size_t sentences = 0;
  for (auto pos = r.narrative.find("In scenario"); pos != std::string::npos; pos = r.narrative.find("In scenario", pos + 1)) ++sentences;
  CHECK(sentences == 2);
}

TEST_CASE("report notes unreported failures and offset ranges, deterministically") {
  auto problem = q_problem("module m(input clk, input [4:1] d, output [4:1] q);");
  auto outcome = failed_with({{"s1_a", 0, "q", bv(4, 8), bv(4, 0)}}, 70);
  auto a = render_report(outcome, {"a"}, problem);
  auto b = render_report(outcome, {"a"}, problem);
  CHECK(a.narrative == b.narrative);
  CHECK(a.narrative.find("69 further mismatches were not reported") != std::string::npos);
  CHECK(a.narrative.find("d [4:1] q [4:1]") != std::string::npos);
}

TEST_CASE("report preconditions") {
  auto problem = q_problem("module m(input a, output y);");
  CHECK_THROWS_AS(render_report(failed_with({}), {""}, problem), std::invalid_argument);
  SimOutcome passed;
  passed.passed = true;
  CHECK_THROWS_AS(render_report(passed, {""}, problem), std::invalid_argument);
  auto unbuilt = failed_with({{"s", 0, "y", bv(1, 1), bv(1, 0)}});
  unbuilt.build_ok = false;
  CHECK_THROWS_AS(render_report(unbuilt, {""}, problem), std::invalid_argument);
}

TEST_CASE("root-cause judge replies and fallback") {
  CounterRig rig;
  auto problem = rig.with(kBadDut);
  auto report = render_report(failed_with({{"s0_count", 1, "q", bv(4, 1), bv(4, 3)}}), rig.plan, problem);

  rig.provider->on(Agent::root_cause, [](const PromptBundle&, int) { return root_cause_reply("MODEL", "model wraps early"); });
  auto v = judge_root_cause(report, problem, rig.model("bad"), kBadDut, rig.gateway);
  CHECK(v.cause == RootCause::MODEL_FAULT);
  CHECK(v.rationale == "model wraps early");
  auto prompt = rig.provider->log().back().prompt.user;
  CHECK(prompt.find(kBadDut) != std::string::npos);
  CHECK(prompt.find("bad") != std::string::npos);
  CHECK(prompt.find(report.narrative) != std::string::npos);
  CHECK(prompt.find("counting up by one") != std::string::npos);

  rig.provider->on(Agent::root_cause, [](const PromptBundle&, int) { return std::string("garbage"); });
  auto before = rig.provider->calls(Agent::root_cause);
  v = judge_root_cause(report, problem, rig.model("bad"), kBadDut, rig.gateway);
  CHECK(rig.provider->calls(Agent::root_cause) == before + 2);
  CHECK(v.cause == RootCause::DUT_FAULT);
  CHECK(v.fallback);

  rig.provider->on(Agent::root_cause, [](const PromptBundle&, int) { return root_cause_reply("BOTH"); });
  CHECK(judge_root_cause(report, problem, rig.model("bad"), kBadDut, rig.gateway).fallback);
  CHECK(root_cause_name(RootCause::MODEL_FAULT) == "MODEL_FAULT");
}

TEST_CASE("golden design and correct model pass without a judge") {
  CounterRig rig;
  auto res = rig.run(kGoodDut, 1);
  CHECK(res.verdict.dut_status == DutStatus::PASS);
  CHECK(res.verdict.rounds_used == 0);
  CHECK(res.first_run_passed);
  CHECK(rig.provider->calls(Agent::root_cause) == 0);
  CHECK(format_verdict_line(res.verdict) == "VERDICT: PASS rounds=0");
  CHECK(std::filesystem::exists(rig.dir / "ws/validate/verdict.json"));
  CHECK(read_text_file(rig.dir / "ws/validate/sim_main.cpp") == res.testbench);
}

TEST_CASE("a model fault is repaired and the design then passes") {
  CounterRig rig;
  rig.provider->on(Agent::root_cause, [](const PromptBundle&, int) { return root_cause_reply("MODEL", "counts by two"); });
  rig.provider->on(Agent::refine, [](const PromptBundle&, int) { return fenced("python", "good model"); });
  auto res = rig.run(kGoodDut, 2);
  CHECK(res.verdict.dut_status == DutStatus::PASS);
  CHECK(res.verdict.rounds_used == 1);
  CHECK_FALSE(res.first_run_passed);
  CHECK(rig.provider->calls(Agent::root_cause) == 1);
  CHECK(rig.provider->calls(Agent::refine) == 1);
  REQUIRE(res.verdict.history.size() == 2);
  CHECK(res.verdict.history[0].verdict->cause == RootCause::MODEL_FAULT);
  CHECK(res.model.source == "good model");
  CHECK(res.model.generation == 1);
  CHECK(res.traces == rig.traces_of(1));
  for (const auto& c : rig.provider->log()) {
    if (c.agent == Agent::refine) {
      CHECK(c.params.temperature == 0);
      CHECK(c.params.n_samples == 1);
      CHECK(c.prompt.user.find("counts by two") != std::string::npos);
    }
  }
  CHECK(rig.gateway.ledger().usage(Stage::self_improve).prompt_tokens == 0);
  CHECK(std::filesystem::exists(rig.dir / "ws/validate/round_0/report.txt"));
  CHECK(std::filesystem::exists(rig.dir / "ws/validate/round_0/verdict.json"));
  auto verdict = read_json_file(rig.dir / "ws/validate/verdict.json");
  CHECK(verdict["dut_status"] == "PASS");
  CHECK(verdict["rounds_used"] == 1);
}

TEST_CASE("a design fault ends the loop after one verdict") {
  CounterRig rig;
  rig.provider->on(Agent::root_cause, [](const PromptBundle&, int) { return root_cause_reply("DUT"); });
  auto res = rig.run(kBadDut, 1);
  CHECK(res.verdict.dut_status == DutStatus::FAIL);
  CHECK(res.verdict.rounds_used == 1);
  CHECK(res.verdict.history.size() == 1);
  CHECK_FALSE(res.verdict.history[0].outcome.mismatches.empty());
  CHECK(rig.provider->calls(Agent::refine) == 0);
  CHECK(format_verdict_line(res.verdict) == "VERDICT: FAIL rounds=1");
}

TEST_CASE("an unavailable judge never turns a failure into a pass") {
  CounterRig rig;
  rig.provider->set_down(true);
  auto res = rig.run(kGoodDut, 2);
  CHECK(res.verdict.dut_status == DutStatus::FAIL);
  CHECK(res.verdict.judge_unavailable);
  CHECK(res.verdict.rounds_used == 0);
}

TEST_CASE("a fixture miss in the judge counts as unavailable") {
  CounterRig rig;
  TempDir store;
  Gateway replay(std::make_shared<FixtureProvider>(store.path()));
  AgentContext ctx{replay, rig.backend, rig.settings, {}};
  auto res = validate_loop(rig.with(kBadDut), rig.suite, rig.plan, rig.model("good"), rig.traces_of(1), 2, ctx, rig.sim);
  CHECK(res.verdict.dut_status == DutStatus::FAIL);
  CHECK(res.verdict.judge_unavailable);
}

TEST_CASE("a build failure stops without consulting the judge") {
  CounterRig rig;
  rig.sim.set_build_failure(true);
  auto res = rig.run(kGoodDut, 1);
  CHECK(res.verdict.dut_status == DutStatus::FAIL);
  CHECK(res.verdict.build_failed);
  CHECK(res.verdict.rounds_used == 0);
  CHECK(rig.provider->calls(Agent::root_cause) == 0);
  CHECK(rig.sim.runs() == 1);
}

TEST_CASE("the judge budget is never exceeded") {
  for (int budget = 1; budget <= 3; ++budget) {
    CounterRig rig;
    rig.provider->on(Agent::root_cause, [](const PromptBundle&, int) { return root_cause_reply("MODEL"); });
    rig.provider->on(Agent::refine, [](const PromptBundle&, int) { return fenced("python", "still bad"); });
    auto res = rig.run(kGoodDut, 2, budget);
    CHECK(res.verdict.dut_status == DutStatus::FAIL);
    CHECK(res.verdict.rounds_used == budget);
    CHECK(rig.provider->calls(Agent::root_cause) == budget);
    CHECK(res.verdict.history.size() == static_cast<std::size_t>(budget) + 1);
    CHECK_FALSE(res.verdict.history.back().verdict.has_value());
  }
}

TEST_CASE("a refined model that fails to run is not adopted") {
  CounterRig rig;
  rig.provider->on(Agent::root_cause, [](const PromptBundle&, int) { return root_cause_reply("MODEL"); });
  rig.provider->on(Agent::refine, [](const PromptBundle&, int) { return fenced("python", "raise"); });
  auto res = rig.run(kGoodDut, 2, 1);
  CHECK(res.model.source == "bad");
  CHECK(res.traces == rig.traces_of(2));
  CHECK(res.verdict.dut_status == DutStatus::FAIL);
}

TEST_CASE("validation guards") {
  CounterRig rig;
  CHECK_THROWS_AS(validate_loop(rig.problem, rig.suite, rig.plan, rig.model("good"), rig.traces_of(1), 2, rig.ctx, rig.sim), BadProblem);
  CHECK_THROWS_AS(rig.run(kGoodDut, 1, 0), ConfigError);
}

}
