#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tbgen/context.hpp"
#include "tbgen/emulator.hpp"
#include "tbgen/signals.hpp"
#include "tbgen/stimulus.hpp"

namespace tbgen {

struct SimOutcome {
  bool passed = false;
  std::vector<TraceDiff> mismatches;
  std::size_t failure_count = 0;
  std::string raw_log;
  bool build_ok = true;
};

/// Inverse of format_mismatch_line. nullopt for any line that is not a
/// well-formed mismatch line.
std::optional<TraceDiff> parse_mismatch_line(std::string_view line);

/// Reads MISMATCH lines and the RESULT summary. Throws ProtocolError when the
/// summary is missing, duplicated, or disagrees with the exit code.
SimOutcome parse_sim_output(const std::string& stdout_text, int exit_code);

/// Runs `<verilator> --version`; returns the version line. Throws
/// EnvironmentError when the tool is missing.
std::string probe_simulator(const std::string& verilator);

struct SimJob {
  std::string dut_source;
  ModuleInterface interface;
  TraceSet traces;  // what the testbench encodes
  std::string testbench;
  std::filesystem::path workdir;
};

class Simulator {
 public:
  virtual ~Simulator() = default;
  virtual SimOutcome build_and_run(const SimJob& job) = 0;
};

/// `verilator --cc --exe --build -Wno-fatal dut.v sim_main.cpp --top-module <m>`
/// then `obj_dir/V<m>`, both inside job.workdir.
class VerilatorSimulator final : public Simulator {
 public:
  VerilatorSimulator(std::string executable, std::chrono::milliseconds build_timeout,
                     std::chrono::milliseconds run_timeout);
  SimOutcome build_and_run(const SimJob& job) override;

 private:
  std::string exe_;
  std::chrono::milliseconds build_timeout_;
  std::chrono::milliseconds run_timeout_;
};

struct DiagnosticReport {
  std::string narrative;
  std::vector<TraceDiff> mismatches;
  std::map<std::string, std::string> scenario_notes;  // scenario id -> plan excerpt
};

/// Rule-based natural-language rendering of a failed run. Byte-identical for
/// identical inputs. Throws std::invalid_argument unless the run built,
/// failed, and reported at least one mismatch.
DiagnosticReport render_report(const SimOutcome& outcome, const ScenarioPlan& plan,
                               const Problem& problem);

enum class RootCause { DUT_FAULT, MODEL_FAULT };
std::string_view root_cause_name(RootCause c);

struct RootCauseVerdict {
  RootCause cause = RootCause::DUT_FAULT;
  std::string rationale;
  bool fallback = false;
};

/// Asks the judge whether the DUT or the functional model is at fault. One
/// re-ask on an unusable reply, then DUT_FAULT. Gateway errors propagate.
RootCauseVerdict judge_root_cause(const DiagnosticReport& report, const Problem& problem,
                                  const EmulatorScript& model, const std::string& dut_source,
                                  Gateway& gateway, int max_tokens = 4096);

enum class DutStatus { PASS, FAIL };

struct HistoryEntry {
  SimOutcome outcome;
  std::optional<RootCauseVerdict> verdict;
};

struct FinalVerdict {
  DutStatus dut_status = DutStatus::FAIL;
  int rounds_used = 0;  // judge verdicts obtained
  std::vector<HistoryEntry> history;
  bool build_failed = false;
  bool judge_unavailable = false;
};

std::string format_verdict_line(const FinalVerdict& v);

struct ValidationResult {
  FinalVerdict verdict;
  EmulatorScript model;  // possibly refined
  TraceSet traces;
  std::string testbench;  // the last emitted unit
  bool first_run_passed = false;
};

/// Simulate; on failure explain, ask the root-cause judge, and either stop
/// (DUT at fault) or refine the model once and simulate again. At most
/// `budget` judge rounds. A build failure ends the loop with FAIL and no
/// judge call. An unavailable gateway ends it with FAIL.
ValidationResult validate_loop(const Problem& problem, const StimulusSuite& suite,
                               const ScenarioPlan& plan, const EmulatorScript& model,
                               const TraceSet& traces, int budget, AgentContext& ctx,
                               Simulator& simulator);

}  // namespace tbgen
