#pragma once

#include <string>
#include <variant>
#include <vector>

#include "tbgen/context.hpp"
#include "tbgen/emulator.hpp"
#include "tbgen/signals.hpp"

namespace tbgen {

// Consensus over the candidates' reference traces.
struct Consistent {
  TraceSet representative;
};
struct OutlierFiltered {
  int outlier_index = 0;          // candidate index of the single deviating trace
  std::vector<TraceSet> evidence;  // every successful trace except the outlier's
};
struct NoMajority {
  std::vector<TraceSet> evidence;  // distinct traces, first-seen order
};
using ConsensusClass = std::variant<Consistent, OutlierFiltered, NoMajority>;

std::string_view consensus_name(const ConsensusClass& c);

/// Failed runs are removed first. All remaining equal: Consistent. Exactly one
/// candidate differs from the others, which all agree (needs at least three
/// successes): OutlierFiltered. Otherwise NoMajority. Throws
/// AllCandidatesFailedError when nothing ran successfully.
ConsensusClass classify_tracesets(const std::vector<CandidateRun>& runs);

struct JudgeSelection {
  int best_index = 0;
  bool aligned = false;
  std::string analysis;
  bool fallback = false;        // reply unusable twice; lowest live index chosen
  std::string fallback_reason;  // the JudgeParseError message
  std::string raw_reply;
};

struct ImproveConfig {
  int max_iterations = 3;
  int n_samples = 5;
  double temperature = 0.3;
};

/// Step-indexed table of input and output values per scenario, cut after
/// max_steps rows with an elision line.
std::string render_waveforms(const TraceSet& traces, std::size_t max_steps = 32);

/// Shared context of the judge and refine prompts: specification,
/// interface, candidate sources, consensus, and evidence waveforms.
std::string render_judge_inputs(const Problem& problem, const CandidateSet& set,
                                const std::vector<CandidateRun>& runs,
                                const ConsensusClass& consensus);

/// Parses {"best": int, "aligned": bool, "analysis": str} from a fenced json
/// block. Returns an error description instead when the reply is unusable or
/// best is not one of `live`.
std::variant<JudgeSelection, std::string> parse_judge_reply(const std::string& text,
                                                            const std::vector<int>& live);

/// Asks the judge for the best live candidate; one re-ask on an unusable
/// reply, then falls back to the lowest live index with aligned=false.
JudgeSelection judge_select(const ConsensusClass& consensus, const Problem& problem,
                            const CandidateSet& set, const std::vector<CandidateRun>& runs,
                            AgentContext& ctx);

/// A fresh candidate set of params.n_samples models seeded by the selected
/// one; generation = selected.generation + 1.
CandidateSet refine(const EmulatorScript& selected, const JudgeSelection& selection,
                    const std::string& judge_inputs, const SamplingParams& params, Stage stage,
                    AgentContext& ctx);

struct ImproveResult {
  EmulatorScript model;
  TraceSet traces;
  JudgeSelection selection;
  int rounds = 0;
  int judge_calls = 0;
  int refine_calls = 0;
};

/// Sample, execute, classify, judge, refine; at most max_iterations judge
/// rounds and one fewer refinements. Returns the first aligned selection or
/// the last round's selection. Persists round_<t>/ artifacts and
/// Reference_signal.json.
ImproveResult improve_loop(const Problem& problem, const StimulusSuite& suite,
                           const ImproveConfig& config, AgentContext& ctx);

}  // namespace tbgen
