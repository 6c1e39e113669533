#pragma once

#include <map>
#include <string>
#include <vector>

#include "tbgen/bitvector.hpp"
#include "tbgen/interface.hpp"

namespace tbgen {

using SignalMap = std::map<std::string, BitVector>;

/// One evaluated cycle of input assignments. Clock ports never appear here.
struct StimulusStep {
  SignalMap assignments;
  friend bool operator==(const StimulusStep&, const StimulusStep&) = default;
};

struct Scenario {
  std::string id;
  std::vector<StimulusStep> steps;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct StimulusSuite {
  ModuleInterface interface;
  std::vector<Scenario> scenarios;

  std::size_t total_steps() const;
  friend bool operator==(const StimulusSuite&, const StimulusSuite&) = default;
};

struct TraceStep {
  SignalMap inputs;
  SignalMap outputs;
  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct Trace {
  std::string scenario_id;
  std::vector<TraceStep> steps;
  friend bool operator==(const Trace&, const Trace&) = default;
};

struct TraceSet {
  ModuleInterface interface;
  std::vector<Trace> traces;
  friend bool operator==(const TraceSet&, const TraceSet&) = default;
};

struct TraceDiff {
  std::string scenario_id;
  std::size_t step_index = 0;
  std::string signal;
  BitVector expected = BitVector::zero(1);
  BitVector actual = BitVector::zero(1);
  friend bool operator==(const TraceDiff&, const TraceDiff&) = default;
};

/// Checks a step against the interface: keys name non-clock inputs and
/// widths match. Throws ValidationError.
void validate_step(const StimulusStep& step, const ModuleInterface& iface);
void validate_suite(const StimulusSuite& suite);

/// Inputs must cover exactly the data inputs and outputs exactly the
/// outputs; scenario ids unique. Throws ValidationError.
void validate_traceset(const TraceSet& traces);

/// Checks that `traces` mirrors `suite`: same scenario ids in order, same
/// step counts, and identical input values. Throws StructureError.
void check_traces_match_suite(const TraceSet& traces, const StimulusSuite& suite);

/// Output-only, step-wise comparison. Diffs come out ordered by scenario,
/// step, then interface port order. Throws StructureError when the two sets
/// do not have the same shape.
std::vector<TraceDiff> compare_tracesets(const TraceSet& expected, const TraceSet& actual);

/// Value and structure equality as used by consensus: no diffs and same shape.
bool traces_equal(const TraceSet& a, const TraceSet& b);

}  // namespace tbgen
