#include "tbgen/improve.hpp"

#include <algorithm>
#include <sstream>

#include "tbgen/errors.hpp"
#include "tbgen/log.hpp"
#include "tbgen/prompts.hpp"
#include "tbgen/wire.hpp"

namespace tbgen {

std::string_view consensus_name(const ConsensusClass& c) {
  switch (c.index()) {
    case 0: return "consistent";
    case 1: return "outlier_filtered";
    default: return "no_majority";
  }
}

namespace {

struct Group {
  const TraceSet* traces;
  std::vector<int> members;  // candidate indices
};

std::vector<Group> group_runs(const std::vector<CandidateRun>& runs) {
  std::vector<Group> groups;
  for (const auto& run : runs) {
    if (!run.ok()) continue;
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return traces_equal(*g.traces, run.traces()); });
    if (it == groups.end()) {
      groups.push_back({&run.traces(), {run.candidate_index}});
    } else {
      it->members.push_back(run.candidate_index);
    }
  }
  return groups;
}

}  // namespace

ConsensusClass classify_tracesets(const std::vector<CandidateRun>& runs) {
  auto groups = group_runs(runs);
  if (groups.empty()) {
    std::string why;
    for (const auto& r : runs) {
      why += "\n  candidate " + std::to_string(r.candidate_index) + ": " +
             std::get<ExecutionFailure>(r.outcome).message;
    }
    throw AllCandidatesFailedError("every functional-model candidate failed to execute" + why);
  }
  if (groups.size() == 1) return Consistent{*groups.front().traces};

  std::size_t successes = 0;
  for (const auto& g : groups) successes += g.members.size();
  if (groups.size() == 2 && successes >= 3) {
    for (std::size_t gi = 0; gi < 2; ++gi) {
      if (groups[gi].members.size() != 1) continue;
      OutlierFiltered out;
      out.outlier_index = groups[gi].members.front();
      for (const auto& r : runs) {
        if (r.ok() && r.candidate_index != out.outlier_index) out.evidence.push_back(r.traces());
      }
      return out;
    }
  }
  NoMajority nm;
  for (const auto& g : groups) nm.evidence.push_back(*g.traces);
  return nm;
}

std::string render_waveforms(const TraceSet& traces, std::size_t max_steps) {
  std::ostringstream os;
  auto inputs = traces.interface.data_inputs();
  auto outputs = traces.interface.outputs();
  for (const auto& tr : traces.traces) {
    os << "Scenario " << tr.scenario_id << " (" << tr.steps.size() << " steps)\n| step |";
    for (const PortDecl* p : inputs) os << " " << p->name << " (in) |";
    for (const PortDecl* p : outputs) os << " " << p->name << " (out) |";
    os << "\n|---|";
    for (std::size_t i = 0; i < inputs.size() + outputs.size(); ++i) os << "---|";
    os << "\n";
    std::size_t shown = std::min(max_steps, tr.steps.size());
    for (std::size_t k = 0; k < shown; ++k) {
      os << "| " << k << " |";
      for (const PortDecl* p : inputs) os << " " << format_bitvector(tr.steps[k].inputs.at(p->name)) << " |";
      for (const PortDecl* p : outputs) os << " " << format_bitvector(tr.steps[k].outputs.at(p->name)) << " |";
      os << "\n";
    }
    if (shown < tr.steps.size()) os << "... " << tr.steps.size() - shown << " more steps elided\n";
    os << "\n";
  }
  return os.str();
}

std::string render_judge_inputs(const Problem& problem, const CandidateSet& set,
                                const std::vector<CandidateRun>& runs,
                                const ConsensusClass& consensus) {
  std::ostringstream os;
  os << "## Specification\n" << problem.spec_text << "\n\n";
  os << "## Module interface (" << problem.interface.module_name << ", "
     << circuit_type_name(problem.circuit_type) << ")\n"
     << render_port_table(problem.interface) << "\n"
     << prompts::width_semantics_note(problem.interface) << "\n\n";

  auto groups = group_runs(runs);
  auto label = [&](int cand) -> std::string {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& m = groups[g].members;
      if (std::find(m.begin(), m.end(), cand) != m.end()) return std::string(1, static_cast<char>('A' + g));
    }
    return {};
  };

  os << "## Candidates\n";
  for (const auto& cand : set.candidates) {
    os << "### Candidate " << cand.candidate_index << "\n```python\n" << cand.source << "\n```\n";
    auto run = std::find_if(runs.begin(), runs.end(),
                            [&](const CandidateRun& r) { return r.candidate_index == cand.candidate_index; });
    if (run == runs.end()) {
      os << "Not executed.\n\n";
    } else if (!run->ok()) {
      os << "Execution failed: " << std::get<ExecutionFailure>(run->outcome).message << "\n\n";
    } else {
      os << "Produced waveform " << label(cand.candidate_index) << ".\n\n";
    }
  }

  os << "## Consensus\n";
  std::vector<std::size_t> shown_groups;
  if (std::holds_alternative<Consistent>(consensus)) {
    os << "All successful candidates produced the same waveform.\n\n";
    shown_groups.push_back(0);
  } else if (auto* of = std::get_if<OutlierFiltered>(&consensus)) {
    os << "All successful candidates agree except candidate " << of->outlier_index
       << ", whose waveform was filtered out as an outlier.\n\n";
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g].members != std::vector<int>{of->outlier_index}) shown_groups.push_back(g);
    }
  } else {
    os << "The candidates disagree without a clear majority; every distinct waveform is "
          "shown.\n\n";
    for (std::size_t g = 0; g < groups.size(); ++g) shown_groups.push_back(g);
  }

  os << "## Reference waveforms\n";
  for (std::size_t g : shown_groups) {
    os << "### Waveform " << static_cast<char>('A' + g) << " (candidates";
    for (int m : groups[g].members) os << " " << m;
    os << ")\n" << render_waveforms(*groups[g].traces);
  }
  return os.str();
}

std::variant<JudgeSelection, std::string> parse_judge_reply(const std::string& text,
                                                            const std::vector<int>& live) {
  std::string body;
  try {
    body = extract_code_block(text, "json");
  } catch (const ExtractionError&) {
    return std::string("no fenced json block");
  }
  Json doc;
  try {
    doc = Json::parse(body);
  } catch (const Json::parse_error&) {
    return std::string("fenced block is not valid JSON");
  }
  if (!doc.is_object()) return std::string("reply is not a JSON object");
  auto best = doc.find("best");
  auto aligned = doc.find("aligned");
  if (best == doc.end() || !best->is_number_integer()) return std::string("'best' must be an integer");
  if (aligned == doc.end() || !aligned->is_boolean()) return std::string("'aligned' must be a boolean");
  JudgeSelection sel;
  sel.best_index = best->get<int>();
  sel.aligned = aligned->get<bool>();
  if (auto a = doc.find("analysis"); a != doc.end()) {
    if (!a->is_string()) return std::string("'analysis' must be a string");
    sel.analysis = a->get<std::string>();
  }
  if (std::find(live.begin(), live.end(), sel.best_index) == live.end()) {
    return "'best' = " + std::to_string(sel.best_index) + " is not a live candidate";
  }
  sel.raw_reply = text;
  return sel;
}

JudgeSelection judge_select(const ConsensusClass& consensus, const Problem& problem,
                            const CandidateSet& set, const std::vector<CandidateRun>& runs,
                            AgentContext& ctx) {
  std::vector<int> live;
  for (const auto& r : runs) {
    if (r.ok()) live.push_back(r.candidate_index);
  }
  if (live.empty()) throw AllCandidatesFailedError("no live candidate to judge");
  std::sort(live.begin(), live.end());

  auto inputs = render_judge_inputs(problem, set, runs, consensus);
  auto prompt = prompts::judge_select(inputs);
  SamplingParams params{0.0, 1, ctx.settings.max_tokens};
  auto reply = ctx.gateway.complete(prompt, params, Stage::self_improve).front().text;
  auto parsed = parse_judge_reply(reply, live);
  if (auto* sel = std::get_if<JudgeSelection>(&parsed)) return *sel;

  auto first_problem = std::get<std::string>(parsed);
  log::get("improve")->warn("judge reply unusable ({}), asking again", first_problem);
  reply = ctx.gateway.complete(prompts::with_reask(prompt, first_problem), params, Stage::self_improve)
              .front()
              .text;
  parsed = parse_judge_reply(reply, live);
  if (auto* sel = std::get_if<JudgeSelection>(&parsed)) return *sel;

  JudgeParseError err("judge reply unusable twice: " + first_problem + "; then " +
                      std::get<std::string>(parsed));
  log::get("improve")->error("{}; falling back to candidate {}", err.what(), live.front());
  JudgeSelection fb;
  fb.best_index = live.front();
  fb.aligned = false;
  fb.fallback = true;
  fb.fallback_reason = err.what();
  fb.analysis = "The judge did not return a usable verdict; no misalignment details available.";
  fb.raw_reply = reply;
  return fb;
}

CandidateSet refine(const EmulatorScript& selected, const JudgeSelection& selection,
                    const std::string& judge_inputs, const SamplingParams& params, Stage stage,
                    AgentContext& ctx) {
  if (selection.aligned) throw std::invalid_argument("refine called on an aligned selection");
  auto prompt = prompts::refine(judge_inputs, selection.analysis, selected.source);
  return sample_candidates(prompt, params, stage, selected.generation + 1, ctx);
}

namespace {

const EmulatorScript& candidate_at(const CandidateSet& set, int index) {
  for (const auto& c : set.candidates) {
    if (c.candidate_index == index) return c;
  }
  throw std::out_of_range("no candidate " + std::to_string(index));
}

const TraceSet& traces_of(const std::vector<CandidateRun>& runs, int index) {
  for (const auto& r : runs) {
    if (r.candidate_index == index) return r.traces();
  }
  throw std::out_of_range("no run for candidate " + std::to_string(index));
}

}  // namespace

ImproveResult improve_loop(const Problem& problem, const StimulusSuite& suite,
                           const ImproveConfig& config, AgentContext& ctx) {
  if (config.max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  auto logger = log::get("improve");
  SamplingParams params{config.temperature, config.n_samples, ctx.settings.max_tokens};
  CandidateSet set = sample_candidates(prompts::emulator(problem), params, Stage::emulator, 0, ctx);

  ImproveResult result;
  for (int t = 1; t <= config.max_iterations; ++t) {
    auto round_dir = ctx.workdir.empty() ? std::filesystem::path{}
                                         : ctx.workdir / ("round_" + std::to_string(t));
    auto runs = run_candidates(set, suite, ctx, round_dir);
    auto consensus = classify_tracesets(runs);
    auto selection = judge_select(consensus, problem, set, runs, ctx);
    ++result.judge_calls;
    result.rounds = t;
    result.model = candidate_at(set, selection.best_index);
    result.traces = traces_of(runs, selection.best_index);
    result.selection = selection;
    logger->info("round {}: {} candidates, {}, judge picked {} (aligned={})", t,
                 set.candidates.size(), consensus_name(consensus), selection.best_index,
                 selection.aligned);

    if (!round_dir.empty()) {
      Json judge = {{"round", t},
                    {"consensus", consensus_name(consensus)},
                    {"best", selection.best_index},
                    {"aligned", selection.aligned},
                    {"analysis", selection.analysis},
                    {"fallback", selection.fallback},
                    {"fallback_reason", selection.fallback_reason},
                    {"generation", result.model.generation}};
      if (auto* of = std::get_if<OutlierFiltered>(&consensus)) judge["outlier"] = of->outlier_index;
      write_text_file(round_dir / "judge.json", dump_wire(judge));
    }

    if (selection.aligned) break;
    if (t < config.max_iterations) {
      auto inputs = render_judge_inputs(problem, set, runs, consensus);
      set = refine(result.model, selection, inputs, params, Stage::self_improve, ctx);
      ++result.refine_calls;
    }
  }

  if (!ctx.workdir.empty()) {
    write_text_file(ctx.workdir / "Reference_signal.json", dump_wire(traces_to_json(result.traces)));
    write_text_file(ctx.workdir / "Func_model.py", result.model.source);
  }
  return result;
}

}  // namespace tbgen
