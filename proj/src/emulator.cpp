#include "tbgen/emulator.hpp"

#include <optional>

#include "tbgen/errors.hpp"
#include "tbgen/log.hpp"
#include "tbgen/parallel.hpp"
#include "tbgen/prompts.hpp"
#include "tbgen/wire.hpp"

namespace tbgen {

CandidateSet sample_candidates(const PromptBundle& prompt, const SamplingParams& params,
                               Stage stage, int generation, AgentContext& ctx) {
  auto logger = log::get("emulator");
  auto completions = ctx.gateway.complete(prompt, params, stage);
  std::vector<std::optional<std::string>> sources(completions.size());
  for (std::size_t i = 0; i < completions.size(); ++i) {
    try {
      sources[i] = extract_code_block(completions[i].text, "python");
    } catch (const ExtractionError& e) {
      logger->warn("candidate sample {} unusable, requesting it again: {}", i, e.what());
      SamplingParams once = params;
      once.n_samples = 1;
      auto retry = ctx.gateway.complete(prompt, once, stage,
                                        params.n_samples + static_cast<int>(i));
      try {
        sources[i] = extract_code_block(retry.front().text, "python");
      } catch (const ExtractionError& again) {
        logger->warn("candidate sample {} dropped: {}", i, again.what());
      }
    }
  }
  CandidateSet set{{}, params};
  for (auto& s : sources) {
    if (!s) continue;
    set.candidates.push_back({std::move(*s), static_cast<int>(set.candidates.size()), generation});
  }
  if (set.candidates.empty()) {
    throw EmulatorGenError("no usable functional-model candidate among " +
                           std::to_string(params.n_samples) + " samples");
  }
  return set;
}

CandidateSet generate_emulators(const Problem& problem, int n, AgentContext& ctx) {
  if (n < 1) throw ConfigError("emulator sample count must be at least 1");
  validate_problem(problem);
  SamplingParams params{ctx.settings.temperature, n, ctx.settings.max_tokens};
  return sample_candidates(prompts::emulator(problem), params, Stage::emulator, 0, ctx);
}

std::vector<CandidateRun> run_candidates(const CandidateSet& set, const StimulusSuite& suite,
                                         AgentContext& ctx, const std::filesystem::path& round_dir) {
  if (suite.scenarios.empty()) throw ValidationError("stimulus suite is empty");
  ctx.backend.probe();
  auto logger = log::get("emulator");
  const std::string input_json = dump_wire(stimulus_to_json(suite));

  std::vector<CandidateRun> runs(set.candidates.size());
  parallel_for(set.candidates.size(), ctx.settings.candidate_workers, [&](std::size_t i) {
    const auto& cand = set.candidates[i];
    auto idx = std::to_string(cand.candidate_index);
    runs[i].candidate_index = cand.candidate_index;
    if (!round_dir.empty()) write_text_file(round_dir / ("Func_candidate_" + idx + ".py"), cand.source);

    auto run = ctx.backend.run_emulator(cand.source, input_json, ctx.settings.candidate_timeout);
    if (!run.ok()) {
      runs[i].outcome = ExecutionFailure{run.describe()};
      logger->warn("candidate {} failed: {}", idx, run.describe());
      return;
    }
    try {
      TraceSet traces = traces_from_json(Json::parse(run.output), suite.interface);
      check_traces_match_suite(traces, suite);
      if (!round_dir.empty()) {
        write_text_file(round_dir / ("Reference_signal_candidate_" + idx + ".json"),
                        dump_wire(traces_to_json(traces)));
      }
      runs[i].outcome = std::move(traces);
    } catch (const std::exception& e) {
      runs[i].outcome = ExecutionFailure{std::string("invalid trace: ") + e.what()};
      logger->warn("candidate {} produced an invalid trace: {}", idx, e.what());
    }
  });
  return runs;
}

}  // namespace tbgen
