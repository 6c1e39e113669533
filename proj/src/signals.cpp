#include "tbgen/signals.hpp"

#include <set>

#include "tbgen/errors.hpp"

namespace tbgen {

std::size_t StimulusSuite::total_steps() const {
  std::size_t n = 0;
  for (const auto& s : scenarios) n += s.steps.size();
  return n;
}

void validate_step(const StimulusStep& step, const ModuleInterface& iface) {
  for (const auto& [name, value] : step.assignments) {
    const PortDecl* port = iface.find(name);
    if (!port || port->direction != Direction::input) {
      throw ValidationError("'" + name + "' is not an input port of " + iface.module_name);
    }
    if (port->is_clock) throw ValidationError("clock port '" + name + "' cannot be assigned");
    if (value.width() != port->width) {
      throw ValidationError("port '" + name + "' has width " + std::to_string(port->width) +
                            " but was assigned " + std::to_string(value.width()) + " bits");
    }
  }
}

void validate_suite(const StimulusSuite& suite) {
  std::set<std::string> ids;
  for (const auto& sc : suite.scenarios) {
    if (sc.id.empty()) throw ValidationError("scenario with empty id");
    if (!ids.insert(sc.id).second) throw ValidationError("duplicate scenario id '" + sc.id + "'");
    if (sc.steps.empty()) throw ValidationError("scenario '" + sc.id + "' has no steps");
    for (const auto& st : sc.steps) validate_step(st, suite.interface);
  }
}

namespace {

void check_cover(const SignalMap& values, const std::vector<const PortDecl*>& ports,
                 const std::string& what, const std::string& where) {
  if (values.size() != ports.size()) {
    throw ValidationError(where + ": expected " + std::to_string(ports.size()) + " " + what +
                          " values, found " + std::to_string(values.size()));
  }
  for (const PortDecl* p : ports) {
    auto it = values.find(p->name);
    if (it == values.end()) throw ValidationError(where + ": missing " + what + " '" + p->name + "'");
    if (it->second.width() != p->width) {
      throw ValidationError(where + ": " + what + " '" + p->name + "' has width " +
                            std::to_string(it->second.width()) + ", expected " +
                            std::to_string(p->width));
    }
  }
}

std::string where(const std::string& scenario, std::size_t step) {
  return "scenario " + scenario + " step " + std::to_string(step);
}

void check_shape(const TraceSet& a, const TraceSet& b) {
  if (a.traces.size() != b.traces.size()) {
    throw StructureError("trace sets have " + std::to_string(a.traces.size()) + " and " +
                         std::to_string(b.traces.size()) + " scenarios");
  }
  for (std::size_t i = 0; i < a.traces.size(); ++i) {
    const auto& ta = a.traces[i];
    const auto& tb = b.traces[i];
    if (ta.scenario_id != tb.scenario_id) {
      throw StructureError("scenario " + std::to_string(i) + " is '" + ta.scenario_id +
                           "' on one side and '" + tb.scenario_id + "' on the other");
    }
    if (ta.steps.size() != tb.steps.size()) {
      throw StructureError("scenario '" + ta.scenario_id + "' has " +
                           std::to_string(ta.steps.size()) + " and " +
                           std::to_string(tb.steps.size()) + " steps");
    }
  }
}

}  // namespace

void validate_traceset(const TraceSet& traces) {
  auto inputs = traces.interface.data_inputs();
  auto outputs = traces.interface.outputs();
  std::set<std::string> ids;
  for (const auto& tr : traces.traces) {
    if (tr.scenario_id.empty()) throw ValidationError("trace with empty scenario id");
    if (!ids.insert(tr.scenario_id).second) {
      throw ValidationError("duplicate trace scenario id '" + tr.scenario_id + "'");
    }
    for (std::size_t k = 0; k < tr.steps.size(); ++k) {
      check_cover(tr.steps[k].inputs, inputs, "input", where(tr.scenario_id, k));
      check_cover(tr.steps[k].outputs, outputs, "output", where(tr.scenario_id, k));
    }
  }
}

void check_traces_match_suite(const TraceSet& traces, const StimulusSuite& suite) {
  if (traces.traces.size() != suite.scenarios.size()) {
    throw StructureError("trace has " + std::to_string(traces.traces.size()) +
                         " scenarios, stimulus has " + std::to_string(suite.scenarios.size()));
  }
  for (std::size_t i = 0; i < suite.scenarios.size(); ++i) {
    const auto& sc = suite.scenarios[i];
    const auto& tr = traces.traces[i];
    if (tr.scenario_id != sc.id) {
      throw StructureError("trace scenario " + std::to_string(i) + " is '" + tr.scenario_id +
                           "', expected '" + sc.id + "'");
    }
    if (tr.steps.size() != sc.steps.size()) {
      throw StructureError("scenario '" + sc.id + "' has " + std::to_string(tr.steps.size()) +
                           " trace steps, expected " + std::to_string(sc.steps.size()));
    }
    for (std::size_t k = 0; k < sc.steps.size(); ++k) {
      if (tr.steps[k].inputs != sc.steps[k].assignments) {
        throw StructureError(where(sc.id, k) + ": trace inputs differ from the stimulus");
      }
    }
  }
}

std::vector<TraceDiff> compare_tracesets(const TraceSet& expected, const TraceSet& actual) {
  if (!(expected.interface == actual.interface)) {
    throw StructureError("trace sets describe different interfaces");
  }
  check_shape(expected, actual);
  auto outputs = expected.interface.outputs();
  std::vector<TraceDiff> diffs;
  for (std::size_t i = 0; i < expected.traces.size(); ++i) {
    const auto& te = expected.traces[i];
    const auto& ta = actual.traces[i];
    for (std::size_t k = 0; k < te.steps.size(); ++k) {
      for (const PortDecl* p : outputs) {
        auto ie = te.steps[k].outputs.find(p->name);
        auto ia = ta.steps[k].outputs.find(p->name);
        if (ie == te.steps[k].outputs.end() || ia == ta.steps[k].outputs.end()) {
          throw StructureError(where(te.scenario_id, k) + ": output '" + p->name + "' missing");
        }
        if (!(ie->second == ia->second)) {
          diffs.push_back({te.scenario_id, k, p->name, ie->second, ia->second});
        }
      }
    }
  }
  return diffs;
}

bool traces_equal(const TraceSet& a, const TraceSet& b) {
  try {
    return compare_tracesets(a, b).empty();
  } catch (const StructureError&) {
    return false;
  }
}

}  // namespace tbgen
