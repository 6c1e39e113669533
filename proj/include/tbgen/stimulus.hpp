#pragma once

#include <string>
#include <vector>

#include "tbgen/context.hpp"
#include "tbgen/signals.hpp"
#include "tbgen/wire.hpp"

namespace tbgen {

struct ScenarioPlan {
  std::string text;
};

struct StimulusScript {
  std::string source;
  int sample_index = 0;
};

/// First reasoning step: the test-case design description. Persisted as
/// Testcase_Desc.txt. Throws BadProblem on an empty specification before
/// any model call.
ScenarioPlan design_scenarios(const Problem& problem, AgentContext& ctx);

/// k sampled generator programs. Samples without a fenced block are dropped;
/// StimulusGenError when none survive.
std::vector<StimulusScript> generate_stimulus_scripts(const Problem& problem,
                                                      const ScenarioPlan& plan, int k,
                                                      AgentContext& ctx);

/// Raw scenario list produced by one generator program.
struct ScriptOutput {
  int sample_index = 0;
  Json document;
};

struct MergeResult {
  StimulusSuite suite;
  std::vector<std::string> notes;  // dropped scenarios, ignored keys, truncation
};

/// Validates each scenario against the interface and concatenates in sample
/// order. Ids become "s<sample>_<local-id>"; scenarios with an identical
/// step list are kept once; inputs missing from a step hold their previous
/// value (zero on the first step); totals are capped.
MergeResult merge_stimulus_outputs(const ModuleInterface& iface,
                                   const std::vector<ScriptOutput>& outputs,
                                   std::size_t max_scenarios, std::size_t max_total_steps);

/// Runs every script through the backend and merges the results. Persists
/// the scripts and Input_signal.json. StimulusGenError when no valid
/// scenario remains.
StimulusSuite collect_stimuli(const std::vector<StimulusScript>& scripts,
                              const ModuleInterface& iface, AgentContext& ctx);

}  // namespace tbgen
