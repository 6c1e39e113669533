#include <doctest.h>

#include <string>

#include "tbgen/errors.hpp"
#include "tbgen/interface.hpp"

using namespace tbgen;

TEST_SUITE("signal-model") {

TEST_CASE("clocked header with a bus") {
  auto iface = parse_verilog_interface("module top_module(input clk, input [3:0] a, output [3:0] q);");
  CHECK(iface.module_name == "top_module");
  REQUIRE(iface.ports.size() == 3);
  CHECK(iface.ports[0].is_clock);
  CHECK(iface.find("a")->width == 4);
  CHECK(iface.find("q")->direction == Direction::output);
  CHECK(select_clock(iface) == std::optional<std::string>("clk"));
  REQUIRE(iface.data_inputs().size() == 1);
  CHECK(iface.data_inputs()[0]->name == "a");
}

TEST_CASE("scalar ports and no clock") {
  auto iface = parse_verilog_interface("module m(input x, output y);");
  CHECK(iface.find("x")->width == 1);
  CHECK(iface.find("y")->width == 1);
  CHECK_FALSE(iface.has_clock());
  CHECK_FALSE(select_clock(iface).has_value());
}

TEST_CASE("ranges with a nonzero low index") {
  auto iface = parse_verilog_interface("module m(input [4:1] q_in, output z);");
  CHECK(iface.find("q_in")->width == 4);
  CHECK(iface.find("q_in")->lsb == 1);
  CHECK(iface.find("q_in")->msb() == 4);
}

TEST_CASE("declarations carry across commas and accept data types") {
  auto iface = parse_verilog_interface(
      "// header\nmodule m #(parameter W = 4) (\n  input wire [7:0] a, b,\n  input reset,\n"
      "  output reg [2:0] y, /* c */ output logic z\n);\n  assign z = 1'b0;\nendmodule\n");
  REQUIRE(iface.ports.size() == 5);
  CHECK(iface.find("b")->width == 8);
  CHECK(iface.find("reset")->is_reset);
  CHECK(iface.find("y")->width == 3);
  CHECK(iface.find("z")->width == 1);
}

TEST_CASE("parse errors carry a location") {
  auto fails = [](const std::string& src) {
    try {
      parse_verilog_interface(src);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(fails("wire x;").find("no module") != std::string::npos);
  CHECK(fails("module m(input [W-1:0] a, output y);").find("parameterized") != std::string::npos);
  auto dup = fails("module m(input a,\n  input a, output y);");
  CHECK(dup.find("duplicate") != std::string::npos);
  CHECK(dup.rfind("2:", 0) == 0);
  CHECK_FALSE(fails("module m(inout a, output y);").empty());
  CHECK_FALSE(fails("module m(a, y); input a; output y; endmodule").empty());
  CHECK_FALSE(fails("module m(input [0:3] a, output y);").empty());
  CHECK_FALSE(fails("module m(input a);").empty());
}

TEST_CASE("two clock candidates are ambiguous") {
  CHECK_THROWS_AS(parse_verilog_interface("module m(input clk, input clock, output y);"),
                  AmbiguousClockError);
  ModuleInterface iface{"m", {{"clk", Direction::input, 1, 0, true, false},
                              {"clock", Direction::input, 1, 0, true, false},
                              {"y", Direction::output, 1, 0, false, false}}};
  CHECK_THROWS_AS(select_clock(iface), AmbiguousClockError);
}

TEST_CASE("port table lists every port") {
  auto iface = parse_verilog_interface("module m(input clk, input [4:1] d, output q);");
  auto table = render_port_table(iface);
  CHECK(table.find("| clk | input | 1 | [0:0] | clock |") != std::string::npos);
  CHECK(table.find("| d | input | 4 | [4:1] | data |") != std::string::npos);
}

}
