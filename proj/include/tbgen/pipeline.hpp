#pragma once

#include <filesystem>
#include <string>

#include "tbgen/context.hpp"
#include "tbgen/emulator.hpp"
#include "tbgen/improve.hpp"
#include "tbgen/signals.hpp"
#include "tbgen/stimulus.hpp"
#include "tbgen/validate.hpp"

namespace tbgen {

/// The directory name, which is also the workspace subdirectory.
std::string problem_id_for(const std::filesystem::path& dir);

/// Reads <dir>/spec.txt and the module header from <dir>/interface.v or
/// <dir>/top.v. The problem id is the directory name. Throws BadProblem.
Problem load_problem_dir(const std::filesystem::path& dir);

/// Attaches a DUT whose module header must match the problem interface.
Problem with_dut(Problem problem, std::string dut_source);

/// Which pipeline stages of a workspace are complete (state.json).
class StageState {
 public:
  explicit StageState(std::filesystem::path workdir);
  bool done(const std::string& stage) const;
  void mark(const std::string& stage);
  void reset();

 private:
  void save() const;
  std::filesystem::path file_;
  Json doc_;
};

struct GenTbArtifacts {
  ScenarioPlan plan;
  StimulusSuite suite;
  EmulatorScript model;
  TraceSet traces;
  std::string testbench;
};

/// Stimulus, functional model with self-improvement, then the testbench.
/// Persists Testcase_Desc.txt, Input_signal.json, Reference_signal.json,
/// Func_model.py and sim_main.cpp into ctx.workdir. With `resume`, stages
/// recorded in state.json are loaded from disk instead of recomputed.
GenTbArtifacts run_gen_tb(const Problem& problem, AgentContext& ctx, bool resume);

/// Loads the artifacts of a completed gen-tb run. Throws BadProblem when
/// they are missing.
GenTbArtifacts load_gen_tb(const Problem& problem, const std::filesystem::path& workdir);

ValidationResult run_verify(const Problem& problem_with_dut, const GenTbArtifacts& artifacts,
                            AgentContext& ctx, Simulator& simulator);

}  // namespace tbgen
