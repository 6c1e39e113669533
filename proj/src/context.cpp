#include "tbgen/context.hpp"

#include "tbgen/errors.hpp"

namespace tbgen {

std::string_view circuit_type_name(CircuitType t) { return t == CircuitType::SEQ ? "SEQ" : "CMB"; }

Problem make_problem(std::string id, std::string spec_text, ModuleInterface iface,
                     std::optional<std::string> dut_source) {
  Problem p;
  p.id = std::move(id);
  p.spec_text = std::move(spec_text);
  p.circuit_type = iface.has_clock() ? CircuitType::SEQ : CircuitType::CMB;
  p.interface = std::move(iface);
  p.dut_source = std::move(dut_source);
  validate_problem(p);
  return p;
}

void validate_problem(const Problem& p) {
  if (p.id.empty()) throw BadProblem("problem id is empty");
  if (p.spec_text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw BadProblem("problem " + p.id + " has an empty specification");
  }
  try {
    validate_interface(p.interface);
  } catch (const Error& e) {
    throw BadProblem("problem " + p.id + ": " + e.what());
  }
  if ((p.circuit_type == CircuitType::SEQ) != p.interface.has_clock()) {
    throw BadProblem("problem " + p.id + ": circuit type disagrees with the clock port");
  }
}

void validate_settings(const Settings& s) {
  auto positive = [](long long v, const char* name) {
    if (v < 1) throw ConfigError(std::string(name) + " must be at least 1");
  };
  positive(s.stimulus_samples, "stimulus_samples");
  positive(s.emulator_samples, "emulator_samples");
  positive(s.improve_iterations, "improve_iterations");
  positive(s.validation_budget, "validation_budget");
  positive(s.max_tokens, "max_tokens");
  positive(s.candidate_workers, "workers.candidates");
  positive(s.problem_workers, "workers.problems");
  positive(static_cast<long long>(s.max_scenarios), "limits.max_scenarios");
  positive(static_cast<long long>(s.max_total_steps), "limits.max_total_steps");
  positive(s.max_failures_reported, "codegen.max_failures_reported");
  if (!(s.temperature >= 0)) throw ConfigError("temperature must be non-negative");
}

}  // namespace tbgen
