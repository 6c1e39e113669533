#include "tbgen/codegen.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <sstream>

#include "tbgen/errors.hpp"

namespace tbgen {

CodegenOptions default_codegen_options(const ModuleInterface& iface) {
  CodegenOptions opts;
  opts.top_class_name = "V" + iface.module_name;
  opts.clock_port = select_clock(iface);
  return opts;
}

std::string format_fail_line(std::size_t failures) {
  return fmt::format("RESULT: FAIL failures={}", failures);
}

std::string format_mismatch_line(const TraceDiff& diff) {
  return fmt::format("MISMATCH scenario={} step={} signal={} expected={} actual={}", diff.scenario_id,
                     diff.step_index, diff.signal, format_bitvector(diff.expected),
                     format_bitvector(diff.actual));
}

namespace {

// Tokens that end up inside the mismatch grammar or C string literals.
bool plain_token(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

bool c_identifier(const std::string& s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string hex_literal(const BitVector& v) {
  return fmt::format("0x{:x}ULL", *v.to_u64());
}

std::string binary_comment(const BitVector& v) {
  return fmt::format("/* {}'b{} */", v.width(), format_bitvector(v));
}

void check_inputs(const ModuleInterface& iface, const TraceSet& traces, const CodegenOptions& opts) {
  if (!(traces.interface == iface)) throw CodegenError("trace interface differs from the module interface");
  try {
    validate_interface(iface);
    validate_traceset(traces);
  } catch (const Error& e) {
    throw CodegenError(std::string("traces do not fit the interface: ") + e.what());
  }
  auto clock = select_clock(iface);
  if (opts.clock_port != clock) {
    throw CodegenError("clock_port '" + opts.clock_port.value_or("") +
                       "' does not name the interface clock '" + clock.value_or("") + "'");
  }
  if (!c_identifier(opts.top_class_name)) throw CodegenError("invalid model class name '" + opts.top_class_name + "'");
  if (opts.max_failures_reported < 1) throw CodegenError("max_failures_reported must be positive");
  for (const auto& p : iface.ports) {
    if (!c_identifier(p.name)) throw CodegenError("port name '" + p.name + "' is not a C identifier");
  }
  std::size_t total = 0;
  for (const auto& tr : traces.traces) {
    if (!plain_token(tr.scenario_id)) throw CodegenError("scenario id '" + tr.scenario_id + "' is not printable as a token");
    total += tr.steps.size();
  }
  if (traces.traces.empty()) throw CodegenError("no scenarios to emit");
  if (traces.traces.size() > opts.max_scenarios) throw CodegenError("too many scenarios");
  if (total > opts.max_total_steps) throw CodegenError("too many steps");
}

constexpr const char* kPrelude = R"(#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include "verilated.h"
#include "{CLASS}.h"

static int g_failures = 0;
static const int kMaxReported = {MAX};

static std::string to_binary(const uint32_t* words, int width) {
  std::string s(width, '0');
  for (int i = 0; i < width; ++i) {
    if ((words[i / 32] >> (i % 32)) & 1u) s[width - 1 - i] = '1';
  }
  return s;
}

static void mismatch(const char* scenario, int step, const char* signal, const char* expected,
                     const uint32_t* actual, int width) {
  ++g_failures;
  if (g_failures <= kMaxReported) {
    std::printf("MISMATCH scenario=%s step=%d signal=%s expected=%s actual=%s\n", scenario, step,
                signal, expected, to_binary(actual, width).c_str());
  }
}

static void check(const char* scenario, int step, const char* signal, int width, uint64_t actual,
                  uint64_t expected, const char* expected_bin) {
  const uint64_t mask = width >= 64 ? ~0ULL : ((1ULL << width) - 1);
  actual &= mask;
  if (actual != expected) {
    const uint32_t words[2] = {static_cast<uint32_t>(actual), static_cast<uint32_t>(actual >> 32)};
    mismatch(scenario, step, signal, expected_bin, words, width);
  }
}

static void check_wide(const char* scenario, int step, const char* signal, int width,
                       uint32_t* actual, const uint32_t* expected, const char* expected_bin) {
  const int n = (width + 31) / 32;
  if (width % 32) actual[n - 1] &= (1u << (width % 32)) - 1;
  for (int i = 0; i < n; ++i) {
    if (actual[i] != expected[i]) {
      mismatch(scenario, step, signal, expected_bin, actual, width);
      return;
    }
  }
}
)";

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
  return text;
}

void emit_assign(std::ostringstream& os, const PortDecl& port, const BitVector& v) {
  if (port.width <= 64) {
    os << "  top->" << port.name << " = " << hex_literal(v) << "; " << binary_comment(v) << "\n";
    return;
  }
  auto words = v.words32();
  os << "  " << binary_comment(v) << "\n";
  for (std::size_t i = 0; i < words.size(); ++i) {
    os << "  top->" << port.name << "[" << i << "] = " << fmt::format("0x{:08x}u", words[i]) << ";\n";
  }
}

void emit_check(std::ostringstream& os, const std::string& sid, std::size_t step, const PortDecl& port,
                const BitVector& v) {
  auto bin = format_bitvector(v);
  if (port.width <= 64) {
    os << "  check(\"" << sid << "\", " << step << ", \"" << port.name << "\", " << port.width
       << ", top->" << port.name << ", " << hex_literal(v) << ", \"" << bin << "\"); "
       << binary_comment(v) << "\n";
    return;
  }
  auto words = v.words32();
  os << "  {\n    " << binary_comment(v) << "\n    const uint32_t e[] = {";
  for (std::size_t i = 0; i < words.size(); ++i) os << (i ? ", " : "") << fmt::format("0x{:08x}u", words[i]);
  os << "};\n    uint32_t a[" << words.size() << "];\n"
     << "    for (int i = 0; i < " << words.size() << "; ++i) a[i] = top->" << port.name << "[i];\n"
     << "    check_wide(\"" << sid << "\", " << step << ", \"" << port.name << "\", " << port.width
     << ", a, e, \"" << bin << "\");\n  }\n";
}

}  // namespace

std::string emit_testbench(const ModuleInterface& iface, const TraceSet& traces,
                           const CodegenOptions& opts) {
  check_inputs(iface, traces, opts);
  const std::string& cls = opts.top_class_name;
  auto inputs = iface.data_inputs();
  auto outputs = iface.outputs();

  std::ostringstream os;
  os << "// Self-checking simulation main for module " << iface.module_name << ".\n";
  os << "// " << traces.traces.size() << " scenarios, "
     << (opts.clock_port ? "clocked on " + *opts.clock_port : std::string("combinational")) << ".\n";
  os << replace_all(replace_all(kPrelude, "{CLASS}", cls), "{MAX}",
                    std::to_string(opts.max_failures_reported));

  for (std::size_t s = 0; s < traces.traces.size(); ++s) {
    const Trace& tr = traces.traces[s];
    os << "\n// scenario " << tr.scenario_id << "\n";
    os << "static void scenario_" << s << "() {\n"
       << "  auto ctx = std::make_unique<VerilatedContext>();\n"
       << "  auto top = std::make_unique<" << cls << ">(ctx.get(), \"top\");\n";
    if (opts.clock_port) os << "  top->" << *opts.clock_port << " = 0;\n";
    for (std::size_t k = 0; k < tr.steps.size(); ++k) {
      const TraceStep& step = tr.steps[k];
      os << "  // step " << k << "\n";
      if (opts.clock_port) os << "  top->" << *opts.clock_port << " = 0;\n";
      for (const PortDecl* p : inputs) emit_assign(os, *p, step.inputs.at(p->name));
      os << "  top->eval();\n";
      if (opts.clock_port) {
        os << "  ctx->timeInc(1);\n"
           << "  top->" << *opts.clock_port << " = 1;\n"
           << "  top->eval();\n"
           << "  ctx->timeInc(1);\n";
      }
      for (const PortDecl* p : outputs) emit_check(os, tr.scenario_id, k, *p, step.outputs.at(p->name));
    }
    os << "  top->final();\n}\n";
  }

  os << "\nint main() {\n";
  for (std::size_t s = 0; s < traces.traces.size(); ++s) os << "  scenario_" << s << "();\n";
  os << "  if (g_failures == 0) {\n"
     << "    std::printf(\"" << kPassLine << "\\n\");\n"
     << "    return 0;\n  }\n"
     << "  std::printf(\"RESULT: FAIL failures=%d\\n\", g_failures);\n"
     << "  return 1;\n}\n";
  return os.str();
}

}  // namespace tbgen
