#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>

#include "tbgen/interface.hpp"
#include "tbgen/llm.hpp"
#include "tbgen/runtime.hpp"

namespace tbgen {

enum class CircuitType { CMB, SEQ };

std::string_view circuit_type_name(CircuitType t);

struct Problem {
  std::string id;
  std::string spec_text;
  ModuleInterface interface;
  std::optional<std::string> dut_source;
  CircuitType circuit_type = CircuitType::CMB;
};

/// Fills circuit_type from the interface and validates. Throws BadProblem.
Problem make_problem(std::string id, std::string spec_text, ModuleInterface iface,
                     std::optional<std::string> dut_source = std::nullopt);
void validate_problem(const Problem& problem);

/// Tunables shared by the agents. Defaults follow the best sampling
/// configuration (N = 5 at temperature 0.3).
struct Settings {
  int stimulus_samples = 3;
  int emulator_samples = 5;
  int improve_iterations = 3;
  double temperature = 0.3;
  int validation_budget = 2;
  int max_tokens = 4096;

  int candidate_workers = 4;
  int problem_workers = 2;

  std::chrono::milliseconds stimulus_timeout{30000};
  std::chrono::milliseconds candidate_timeout{30000};
  std::chrono::milliseconds build_timeout{300000};
  std::chrono::milliseconds sim_timeout{60000};

  std::size_t max_scenarios = 256;
  std::size_t max_total_steps = 4096;
  int max_failures_reported = 64;

  std::string verilator = "verilator";
};

/// Throws ConfigError when a count is below 1 or temperature is negative.
void validate_settings(const Settings& s);

/// What an agent needs to do its job for one problem.
struct AgentContext {
  Gateway& gateway;
  ScriptBackend& backend;
  const Settings& settings;
  std::filesystem::path workdir;  // problem workspace; empty disables persistence
};

}  // namespace tbgen
