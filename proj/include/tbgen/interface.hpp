#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tbgen {

enum class Direction { input, output };

struct PortDecl {
  std::string name;
  Direction direction = Direction::input;
  unsigned width = 1;
  // Declared low index of the range, e.g. 1 for [4:1]. Bit strings stay
  // MSB-first regardless.
  int lsb = 0;
  bool is_clock = false;
  bool is_reset = false;

  int msb() const { return lsb + static_cast<int>(width) - 1; }
  friend bool operator==(const PortDecl&, const PortDecl&) = default;
};

struct ModuleInterface {
  std::string module_name;
  std::vector<PortDecl> ports;

  const PortDecl* find(std::string_view name) const;
  /// Non-clock inputs, in declaration order.
  std::vector<const PortDecl*> data_inputs() const;
  std::vector<const PortDecl*> outputs() const;
  bool has_clock() const;

  friend bool operator==(const ModuleInterface&, const ModuleInterface&) = default;
};

/// Checks unique names, at least one input and one output, and clock
/// well-formedness. Throws ValidationError (or AmbiguousClockError).
void validate_interface(const ModuleInterface& iface);

/// Returns the unique clock port name, none for a combinational interface.
/// Throws AmbiguousClockError when more than one port qualifies.
std::optional<std::string> select_clock(const ModuleInterface& iface);

/// Parses the header of a single ANSI-style Verilog module declaration.
/// Widths must be literal [hi:lo] ranges. Throws ParseError with a
/// line:column location.
ModuleInterface parse_verilog_interface(std::string_view source);

/// Markdown table of the ports, used in prompts.
std::string render_port_table(const ModuleInterface& iface);

}  // namespace tbgen
