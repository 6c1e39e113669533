#include "tbgen/validate.hpp"

#include <fmt/format.h>

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "tbgen/codegen.hpp"
#include "tbgen/errors.hpp"
#include "tbgen/improve.hpp"
#include "tbgen/log.hpp"
#include "tbgen/process.hpp"
#include "tbgen/prompts.hpp"
#include "tbgen/wire.hpp"

namespace tbgen {

std::optional<TraceDiff> parse_mismatch_line(std::string_view line) {
  static const std::regex re(
      R"(^MISMATCH scenario=(\S+) step=(\d+) signal=(\S+) expected=([01]+) actual=([01]+)\r?$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(line.begin(), line.end(), m, re)) return std::nullopt;
  auto expected = m[4].str();
  auto actual = m[5].str();
  if (expected.size() != actual.size()) return std::nullopt;
  TraceDiff d;
  d.scenario_id = m[1].str();
  d.step_index = std::stoull(m[2].str());
  d.signal = m[3].str();
  auto width = static_cast<unsigned>(expected.size());
  d.expected = parse_bitvector(expected, width);
  d.actual = parse_bitvector(actual, width);
  return d;
}

SimOutcome parse_sim_output(const std::string& stdout_text, int exit_code) {
  static const std::regex fail_re(R"(^RESULT: FAIL failures=(\d+)\r?$)");
  SimOutcome out;
  out.raw_log = stdout_text;
  int summaries = 0;
  bool pass = false;
  std::istringstream in(stdout_text);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("MISMATCH ", 0) == 0) {
      auto d = parse_mismatch_line(line);
      if (!d) throw ProtocolError("malformed mismatch line: " + line);
      out.mismatches.push_back(std::move(*d));
      continue;
    }
    std::smatch m;
    if (line == "RESULT: PASS" || line == "RESULT: PASS\r") {
      ++summaries;
      pass = true;
    } else if (std::regex_match(line, m, fail_re)) {
      ++summaries;
      pass = false;
      out.failure_count = std::stoull(m[1].str());
    }
  }
  if (summaries != 1) {
    throw ProtocolError(fmt::format("expected one RESULT line, found {} (exit code {})", summaries, exit_code));
  }
  if (pass != (exit_code == 0) || (!pass && exit_code != 1)) {
    throw ProtocolError(fmt::format("summary says {} but exit code is {}", pass ? "PASS" : "FAIL", exit_code));
  }
  if (pass && !out.mismatches.empty()) throw ProtocolError("PASS reported alongside mismatch lines");
  if (!pass && (out.failure_count == 0 || out.mismatches.size() > out.failure_count)) {
    throw ProtocolError("failure count disagrees with the mismatch lines");
  }
  out.passed = pass;
  return out;
}

std::string probe_simulator(const std::string& verilator) {
  ProcessOptions opts;
  opts.timeout = std::chrono::seconds(30);
  auto r = run_process({verilator, "--version"}, opts);
  if (r.spawn_failed || !r.ok()) {
    throw EnvironmentError("simulator '" + verilator + "' is not usable: " +
                           (r.spawn_failed ? std::string("not found") : r.err));
  }
  auto line = r.out.substr(0, r.out.find('\n'));
  return line;
}

VerilatorSimulator::VerilatorSimulator(std::string executable, std::chrono::milliseconds build_timeout,
                                       std::chrono::milliseconds run_timeout)
    : exe_(std::move(executable)), build_timeout_(build_timeout), run_timeout_(run_timeout) {}

SimOutcome VerilatorSimulator::build_and_run(const SimJob& job) {
  const auto& module = job.interface.module_name;
  std::filesystem::create_directories(job.workdir);
  const auto workdir = std::filesystem::absolute(job.workdir);
  write_text_file(workdir / "dut.v", job.dut_source);
  write_text_file(workdir / "sim_main.cpp", job.testbench);
  std::filesystem::remove_all(workdir / "obj_dir");

  ProcessOptions build_opts;
  build_opts.cwd = workdir;
  build_opts.timeout = build_timeout_;
  auto build = run_process({exe_, "--cc", "--exe", "--build", "-Wno-fatal", "dut.v", "sim_main.cpp",
                            "--top-module", module},
                           build_opts);
  if (build.spawn_failed) throw EnvironmentError("cannot start simulator '" + exe_ + "'");
  if (!build.ok()) {
    SimOutcome out;
    out.build_ok = false;
    out.raw_log = build.out + build.err;
    if (build.timed_out) out.raw_log += "\nbuild timed out";
    if (out.raw_log.empty()) out.raw_log = "build failed with exit code " + std::to_string(build.exit_code);
    write_text_file(workdir / "build.log", out.raw_log);
    return out;
  }

  ProcessOptions run_opts;
  run_opts.cwd = workdir;
  run_opts.timeout = run_timeout_;
  auto run = run_process({(workdir / "obj_dir" / ("V" + module)).string()}, run_opts);
  write_text_file(workdir / "sim.log", run.out + run.err);
  if (run.timed_out) throw SimTimeoutError("simulation of " + module + " timed out");
  if (run.spawn_failed) throw EnvironmentError("built simulation binary could not be started");
  if (run.term_signal != 0) {
    throw ProtocolError(fmt::format("simulation killed by signal {}", run.term_signal));
  }
  auto out = parse_sim_output(run.out, run.exit_code);
  out.raw_log = run.out + run.err;
  return out;
}

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string normalize_words(const std::string& s) {
  std::string out;
  for (char c : lower(s)) out.push_back(c == '_' || c == '-' ? ' ' : c);
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r-*#");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Scenario ids look like s<sample>_<local>. Look for a plan line naming the
// local part.
std::optional<std::string> plan_excerpt(const std::string& scenario_id, const std::string& plan) {
  std::string local = scenario_id;
  if (auto us = scenario_id.find('_'); us != std::string::npos && scenario_id.size() > 1 &&
                                       scenario_id[0] == 's' &&
                                       std::all_of(scenario_id.begin() + 1, scenario_id.begin() + us,
                                                   [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    local = scenario_id.substr(us + 1);
  }
  if (local.empty()) return std::nullopt;
  auto needle = normalize_words(local);
  std::istringstream in(plan);
  for (std::string line; std::getline(in, line);) {
    if (normalize_words(line).find(needle) == std::string::npos) continue;
    auto t = trim(line);
    if (t.empty()) continue;
    if (t.size() > 100) t = t.substr(0, 97) + "...";
    return t;
  }
  return std::nullopt;
}

std::string value_text(const BitVector& v) {
  return format_bitvector(v) + " (" + to_decimal(v) + ")";
}

}  // namespace

DiagnosticReport render_report(const SimOutcome& outcome, const ScenarioPlan& plan,
                               const Problem& problem) {
  if (!outcome.build_ok || outcome.passed || outcome.mismatches.empty()) {
    throw std::invalid_argument("render_report needs a built, failed run with mismatches");
  }
  DiagnosticReport report;
  report.mismatches = outcome.mismatches;

  // Group by (scenario, signal) in order of first appearance, then split
  // into runs of consecutive steps.
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<const TraceDiff*>> by_key;
  for (const auto& d : outcome.mismatches) {
    auto key = std::make_pair(d.scenario_id, d.signal);
    if (!by_key.count(key)) keys.push_back(key);
    by_key[key].push_back(&d);
    if (!report.scenario_notes.count(d.scenario_id)) {
      if (auto ex = plan_excerpt(d.scenario_id, plan.text)) report.scenario_notes[d.scenario_id] = *ex;
    }
  }

  std::ostringstream os;
  os << "Simulation of " << problem.interface.module_name << " failed with " << outcome.failure_count
     << (outcome.failure_count == 1 ? " mismatch" : " mismatches") << ".\n\n";
  for (const auto& key : keys) {
    auto diffs = by_key[key];
    std::stable_sort(diffs.begin(), diffs.end(),
                     [](const TraceDiff* a, const TraceDiff* b) { return a->step_index < b->step_index; });
    std::string where = "In scenario " + key.first;
    if (auto it = report.scenario_notes.find(key.first); it != report.scenario_notes.end()) {
      where += " (" + it->second + ")";
    }
    for (std::size_t i = 0; i < diffs.size();) {
      std::size_t j = i + 1;
      while (j < diffs.size() && diffs[j]->step_index == diffs[j - 1]->step_index + 1) ++j;
      const TraceDiff& first = *diffs[i];
      const TraceDiff& last = *diffs[j - 1];
      if (j - i == 1) {
        os << where << ", at step " << first.step_index << ", output " << first.signal
           << " was expected to be " << value_text(first.expected) << " but the design produced "
           << value_text(first.actual) << ".\n";
      } else {
        os << where << ", at steps " << first.step_index << " through " << last.step_index << ", output "
           << first.signal << " differed from the expected value in all " << (j - i)
           << " steps; at step " << first.step_index << " it was expected to be "
           << value_text(first.expected) << " but the design produced " << value_text(first.actual)
           << ", and at step " << last.step_index << " it was expected to be "
           << value_text(last.expected) << " but the design produced " << value_text(last.actual)
           << ".\n";
      }
      i = j;
    }
  }
  if (outcome.failure_count > outcome.mismatches.size()) {
    os << (outcome.failure_count - outcome.mismatches.size())
       << " further mismatches were not reported individually.\n";
  }

  os << "\nWidth semantics: every value above is written most significant bit first, and the decimal "
        "in parentheses is its unsigned interpretation. For a port declared with range [hi:lo], the "
        "leftmost character is bit hi and the rightmost is bit lo, so reg [4:1] q = 4'b1000 sets q[4] "
        "to 1 and q[1] to 0.";
  bool any_offset = false;
  for (const auto& p : problem.interface.ports) {
    if (p.lsb != 0) {
      if (!any_offset) os << " Ports with a nonzero low index:";
      os << " " << p.name << " [" << p.msb() << ":" << p.lsb << "]";
      any_offset = true;
    }
  }
  os << "\n";
  report.narrative = os.str();
  return report;
}

std::string_view root_cause_name(RootCause c) {
  return c == RootCause::DUT_FAULT ? "DUT_FAULT" : "MODEL_FAULT";
}

namespace {

std::variant<RootCauseVerdict, std::string> parse_root_cause(const std::string& text) {
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
  auto cause = doc.find("cause");
  if (cause == doc.end() || !cause->is_string()) return std::string("'cause' must be a string");
  RootCauseVerdict v;
  if (*cause == "DUT") {
    v.cause = RootCause::DUT_FAULT;
  } else if (*cause == "MODEL") {
    v.cause = RootCause::MODEL_FAULT;
  } else {
    return std::string("'cause' must be \"DUT\" or \"MODEL\"");
  }
  if (auto r = doc.find("rationale"); r != doc.end() && r->is_string()) v.rationale = r->get<std::string>();
  return v;
}

}  // namespace

RootCauseVerdict judge_root_cause(const DiagnosticReport& report, const Problem& problem,
                                  const EmulatorScript& model, const std::string& dut_source,
                                  Gateway& gateway, int max_tokens) {
  auto prompt = prompts::root_cause(problem, dut_source, model.source, report.narrative);
  SamplingParams params{0.0, 1, max_tokens};
  auto reply = gateway.complete(prompt, params, Stage::judge_validate).front().text;
  auto parsed = parse_root_cause(reply);
  if (auto* v = std::get_if<RootCauseVerdict>(&parsed)) return *v;

  auto first = std::get<std::string>(parsed);
  reply = gateway.complete(prompts::with_reask(prompt, first), params, Stage::judge_validate).front().text;
  parsed = parse_root_cause(reply);
  if (auto* v = std::get_if<RootCauseVerdict>(&parsed)) return *v;

  RootCauseVerdict fb;
  fb.cause = RootCause::DUT_FAULT;
  fb.fallback = true;
  fb.rationale = "root-cause reply unusable twice (" + first + "; " + std::get<std::string>(parsed) +
                 "); assuming the DUT is at fault";
  log::get("validate")->warn("{}", fb.rationale);
  return fb;
}

std::string format_verdict_line(const FinalVerdict& v) {
  return fmt::format("VERDICT: {} rounds={}", v.dut_status == DutStatus::PASS ? "PASS" : "FAIL",
                     v.rounds_used);
}

namespace {

Json outcome_json(const SimOutcome& o) {
  Json mm = Json::array();
  for (const auto& d : o.mismatches) mm.push_back(format_mismatch_line(d));
  return {{"passed", o.passed}, {"build_ok", o.build_ok}, {"failure_count", o.failure_count}, {"mismatches", mm}};
}

Json verdict_json(const RootCauseVerdict& v) {
  return {{"cause", root_cause_name(v.cause)}, {"rationale", v.rationale}, {"fallback", v.fallback}};
}

std::string refine_context(const Problem& problem, const DiagnosticReport& report, const TraceSet& traces) {
  std::ostringstream os;
  os << "## Specification\n" << problem.spec_text << "\n\n## Module interface\n"
     << render_port_table(problem.interface) << "\n" << prompts::width_semantics_note(problem.interface)
     << "\n\n## Simulation report against the design\n" << report.narrative
     << "\n## Reference waveforms produced by the current model\n" << render_waveforms(traces);
  return os.str();
}

}  // namespace

ValidationResult validate_loop(const Problem& problem, const StimulusSuite& suite,
                               const ScenarioPlan& plan, const EmulatorScript& model,
                               const TraceSet& traces, int budget, AgentContext& ctx,
                               Simulator& simulator) {
  if (budget < 1) throw ConfigError("validation budget must be at least 1");
  if (!problem.dut_source) throw BadProblem("validation needs a DUT source");
  auto logger = log::get("validate");
  auto opts = default_codegen_options(problem.interface);
  opts.max_failures_reported = ctx.settings.max_failures_reported;
  opts.max_scenarios = ctx.settings.max_scenarios;
  opts.max_total_steps = ctx.settings.max_total_steps;

  ValidationResult res{{}, model, traces, {}, false};
  FinalVerdict& fv = res.verdict;
  static std::atomic<int> scratch_seq{0};
  const auto base = ctx.workdir.empty()
                        ? std::filesystem::temp_directory_path() /
                              fmt::format("tbgen_validate_{}_{}", ::getpid(), scratch_seq++)
                        : ctx.workdir / "validate";

  auto finish = [&](DutStatus status) {
    fv.dut_status = status;
    if (!ctx.workdir.empty()) {
      Json hist = Json::array();
      for (const auto& h : fv.history) {
        Json e = {{"outcome", outcome_json(h.outcome)}};
        if (h.verdict) e["verdict"] = verdict_json(*h.verdict);
        hist.push_back(e);
      }
      write_text_file(base / "verdict.json",
                      dump_wire({{"dut_status", status == DutStatus::PASS ? "PASS" : "FAIL"},
                                 {"rounds_used", fv.rounds_used},
                                 {"build_failed", fv.build_failed},
                                 {"judge_unavailable", fv.judge_unavailable},
                                 {"history", hist}}));
      write_text_file(base / "sim_main.cpp", res.testbench);
      write_text_file(base / "Reference_signal.json", dump_wire(traces_to_json(res.traces)));
    }
    logger->info("{}", format_verdict_line(fv));
    return res;
  };

  for (int round = 0;; ++round) {
    auto round_dir = base / ("round_" + std::to_string(round));
    res.testbench = emit_testbench(problem.interface, res.traces, opts);
    auto outcome = simulator.build_and_run(
        {*problem.dut_source, problem.interface, res.traces, res.testbench, round_dir / "sim"});
    if (round == 0) res.first_run_passed = outcome.passed;

    if (!outcome.build_ok) {
      logger->error("testbench build failed:\n{}", outcome.raw_log);
      fv.build_failed = true;
      fv.history.push_back({outcome, std::nullopt});
      return finish(DutStatus::FAIL);
    }
    if (outcome.passed) {
      fv.history.push_back({outcome, std::nullopt});
      return finish(DutStatus::PASS);
    }
    if (fv.rounds_used >= budget) {
      fv.history.push_back({outcome, std::nullopt});
      return finish(DutStatus::FAIL);
    }

    auto report = render_report(outcome, plan, problem);
    if (!ctx.workdir.empty()) write_text_file(round_dir / "report.txt", report.narrative);
    RootCauseVerdict verdict;
    try {
      verdict = judge_root_cause(report, problem, res.model, *problem.dut_source, ctx.gateway,
                                 ctx.settings.max_tokens);
    } catch (const ProviderError& e) {
      logger->error("root-cause judge unavailable, keeping the simulation verdict: {}", e.what());
      fv.judge_unavailable = true;
      fv.history.push_back({outcome, std::nullopt});
      return finish(DutStatus::FAIL);
    } catch (const FixtureMissError& e) {
      logger->error("root-cause judge unavailable, keeping the simulation verdict: {}", e.what());
      fv.judge_unavailable = true;
      fv.history.push_back({outcome, std::nullopt});
      return finish(DutStatus::FAIL);
    }
    ++fv.rounds_used;
    fv.history.push_back({outcome, verdict});
    if (!ctx.workdir.empty()) write_text_file(round_dir / "verdict.json", dump_wire(verdict_json(verdict)));
    logger->info("round {}: {} ({})", round, root_cause_name(verdict.cause), verdict.rationale);
    if (verdict.cause == RootCause::DUT_FAULT) return finish(DutStatus::FAIL);

    JudgeSelection sel;
    sel.best_index = res.model.candidate_index;
    sel.aligned = false;
    sel.analysis = verdict.rationale;
    SamplingParams params{0.0, 1, ctx.settings.max_tokens};
    AgentContext round_ctx{ctx.gateway, ctx.backend, ctx.settings, ctx.workdir.empty() ? std::filesystem::path{} : round_dir};
    auto set = refine(res.model, sel, refine_context(problem, report, res.traces), params,
                      Stage::judge_validate, round_ctx);
    auto runs = run_candidates(set, suite, round_ctx, ctx.workdir.empty() ? std::filesystem::path{} : round_dir);
    if (runs.front().ok()) {
      res.model = set.candidates.front();
      res.traces = runs.front().traces();
    } else {
      logger->warn("refined model failed to run, keeping the previous one: {}",
                   std::get<ExecutionFailure>(runs.front().outcome).message);
    }
  }
}

}  // namespace tbgen
