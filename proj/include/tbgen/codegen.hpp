#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "tbgen/signals.hpp"

namespace tbgen {

struct CodegenOptions {
  std::string top_class_name;            // Verilator model class, "V" + module name
  std::optional<std::string> clock_port;  // must be the interface's clock when set
  int max_failures_reported = 64;
  std::size_t max_scenarios = 256;
  std::size_t max_total_steps = 4096;
};

/// Class name "V<module>" and the interface's clock (if any).
CodegenOptions default_codegen_options(const ModuleInterface& iface);

inline constexpr std::string_view kPassLine = "RESULT: PASS";
std::string format_fail_line(std::size_t failures);

/// `MISMATCH scenario=<id> step=<k> signal=<name> expected=<bin> actual=<bin>`
std::string format_mismatch_line(const TraceDiff& diff);

/// Renders a self-checking Verilator main. Each scenario runs on a fresh
/// model; a step is one eval for combinational designs and a full clock
/// cycle (low eval, high eval, sample) for sequential ones. Outputs are
/// checked every step. Deterministic in its inputs. Throws CodegenError when
/// the traces do not fit the interface or exceed the caps.
std::string emit_testbench(const ModuleInterface& iface, const TraceSet& traces,
                           const CodegenOptions& opts);

}  // namespace tbgen
