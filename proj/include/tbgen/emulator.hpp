#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "tbgen/context.hpp"
#include "tbgen/signals.hpp"

namespace tbgen {

struct EmulatorScript {
  std::string source;
  int candidate_index = 0;
  int generation = 0;  // 0 = initial sample, +1 per refinement
};

struct CandidateSet {
  std::vector<EmulatorScript> candidates;
  SamplingParams params;
};

struct ExecutionFailure {
  std::string message;
};

struct CandidateRun {
  int candidate_index = 0;
  std::variant<TraceSet, ExecutionFailure> outcome;

  bool ok() const { return std::holds_alternative<TraceSet>(outcome); }
  const TraceSet& traces() const { return std::get<TraceSet>(outcome); }
};

/// Samples params.n_samples models from `prompt`. A sample without a usable
/// fenced block is requested once more (sample index n + i); if it still
/// fails it is dropped. Survivors are indexed 0..m-1. EmulatorGenError when
/// none survive.
CandidateSet sample_candidates(const PromptBundle& prompt, const SamplingParams& params,
                               Stage stage, int generation, AgentContext& ctx);

/// n initial functional-model candidates.
CandidateSet generate_emulators(const Problem& problem, int n, AgentContext& ctx);

/// Executes every candidate over the whole suite, one process per candidate,
/// in parallel. Results come back in candidate order. Candidates that crash,
/// time out, or emit traces that do not mirror the suite become
/// ExecutionFailure entries. When round_dir is non-empty the sources and
/// traces are written there as Func_candidate_<i>.py and
/// Reference_signal_candidate_<i>.json. Throws BackendError if the backend
/// is unusable.
std::vector<CandidateRun> run_candidates(const CandidateSet& set, const StimulusSuite& suite,
                                         AgentContext& ctx,
                                         const std::filesystem::path& round_dir = {});

}  // namespace tbgen
