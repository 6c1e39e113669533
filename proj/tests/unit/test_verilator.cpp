#include <doctest.h>

#include <chrono>

#include "microcorpus.hpp"
#include "scripted.hpp"
#include "tbgen/codegen.hpp"
#include "tbgen/interface.hpp"
#include "tbgen/validate.hpp"

using namespace tbgen;
using namespace tbgen::testing;
using namespace std::chrono_literals;

namespace {

VerilatorSimulator verilator() { return VerilatorSimulator("verilator", 300s, 60s); }

SimOutcome simulate(const std::string& dut, const TraceSet& traces, const std::filesystem::path& dir) {
  auto iface = traces.interface;
  auto tb = emit_testbench(iface, traces, default_codegen_options(iface));
  return verilator().build_and_run({dut, iface, traces, tb, dir});
}

TraceSet identity_traces() {
  auto iface = parse_verilog_interface("module ident(input [2:0] x, output [2:0] y);");
  return {iface, {{"s0", {{{{"x", bv(3, 5)}}, {{"y", bv(3, 5)}}}}}}};
}

}  // namespace

TEST_SUITE("verilator") {

TEST_CASE("toolchain is available") {
  CHECK_FALSE(probe_simulator("verilator").empty());
}

TEST_CASE("identity design passes its testbench") {
  TempDir dir;
  auto out = simulate("module ident(input [2:0] x, output [2:0] y);\n  assign y = x;\nendmodule\n", identity_traces(),
                      dir / "sim");
  CHECK(out.build_ok);
  CHECK(out.passed);
  CHECK(out.raw_log.find("RESULT: PASS") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "sim/sim.log"));
}

TEST_CASE("one inverted output bit gives exactly one mismatch") {
  TempDir dir;
  auto out = simulate("module ident(input [2:0] x, output [2:0] y);\n  assign y = x ^ 3'b001;\nendmodule\n",
                      identity_traces(), dir / "sim");
  CHECK(out.build_ok);
  CHECK_FALSE(out.passed);
  CHECK(out.failure_count == 1);
  REQUIRE(out.mismatches.size() == 1);
  CHECK(out.mismatches[0] == TraceDiff{"s0", 0, "y", bv(3, 5), bv(3, 4)});
  CHECK(out.raw_log.find("RESULT: FAIL failures=1") != std::string::npos);
}

TEST_CASE("a broken testbench is a build failure") {
  TempDir dir;
  auto traces = identity_traces();
  auto tb = emit_testbench(traces.interface, traces, default_codegen_options(traces.interface));
  tb += "\nthis is not C++;\n";
  auto out = verilator().build_and_run(
      {"module ident(input [2:0] x, output [2:0] y);\n  assign y = x;\nendmodule\n", traces.interface, traces, tb, dir / "sim"});
  CHECK_FALSE(out.build_ok);
  CHECK_FALSE(out.passed);
  CHECK_FALSE(out.raw_log.empty());
  CHECK(std::filesystem::exists(dir / "sim/build.log"));
}

TEST_CASE("micro-corpus adder: golden passes, dropped carry is caught") {
  TempDir dir;
  auto root = microcorpus_dir() / "adder2";
  auto iface = parse_verilog_interface(read_text_file(root / "top.v"));
  TraceSet shape{iface, {{"s0_all", {}}}};
  for (unsigned a = 0; a < 4; ++a) {
    for (unsigned b = 0; b < 4; ++b) shape.traces[0].steps.push_back({{{"a", bv(2, a)}, {"b", bv(2, b)}}, {}});
  }
  auto expected = simulate_model(shape, adder2_model(false));
  auto golden = simulate(read_text_file(root / "top.v"), expected, dir / "golden");
  CHECK(golden.passed);
  auto mutant = simulate(read_text_file(root / "mutants/m1.v"), expected, dir / "m1");
  CHECK_FALSE(mutant.passed);
  auto oracle = compare_tracesets(expected, simulate_model(shape, adder2_model(true)));
  CHECK(mutant.mismatches == oracle);
  CHECK(mutant.failure_count == oracle.size());
  REQUIRE_FALSE(mutant.mismatches.empty());
  CHECK(mutant.mismatches[0].scenario_id == "s0_all");
  CHECK(mutant.mismatches[0].signal == "sum");
}

TEST_CASE("clocked design with ports wider than a machine word") {
  TempDir dir;
  const std::string dut =
      "module wide(input clk, input reset, input [69:0] d, output reg [69:0] acc, output reg [3:0] n);\n"
      "  always @(posedge clk) begin\n"
      "    if (reset) begin acc <= 70'd0; n <= 4'd0; end\n"
      "    else begin acc <= acc ^ d; n <= n + 4'd1; end\n"
      "  end\n"
      "endmodule\n";
  auto iface = parse_verilog_interface(dut);
  BigUint mask70 = (BigUint(1) << 70) - 1;
  TraceSet t{iface, {}};
  for (int s = 0; s < 2; ++s) {
    Trace tr{"s" + std::to_string(s), {}};
    BigUint acc = 0;
    unsigned n = 0;
    for (unsigned k = 0; k < 6; ++k) {
      bool reset = k == 0;
      BigUint d = ((BigUint(0x2B) << (60 + k)) | (BigUint(0xDEADBEEF) * (k + 1 + static_cast<unsigned>(s)))) & mask70;
      if (reset) {
        acc = 0;
        n = 0;
      } else {
        acc ^= d;
        n = (n + 1) & 0xF;
      }
      tr.steps.push_back({{{"reset", bv(1, reset)}, {"d", BitVector(70, d)}}, {{"acc", BitVector(70, acc)}, {"n", bv(4, n)}}});
    }
    t.traces.push_back(tr);
  }
  auto out = simulate(dut, t, dir / "ok");
  CHECK(out.build_ok);
  CHECK(out.passed);

  auto skewed = t;
  auto& v = skewed.traces[1].steps[4].outputs.at("acc");
  v = BitVector(70, v.value() ^ (BigUint(1) << 69));
  auto tb = emit_testbench(iface, skewed, default_codegen_options(iface));
  auto bad = verilator().build_and_run({dut, iface, skewed, tb, dir / "skewed"});
  REQUIRE(bad.mismatches.size() == 1);
  CHECK(bad.mismatches[0].scenario_id == "s1");
  CHECK(bad.mismatches[0].step_index == 4);
  CHECK(bad.mismatches[0].expected == v);
  CHECK(bad.mismatches[0].actual == t.traces[1].steps[4].outputs.at("acc"));
}

}
