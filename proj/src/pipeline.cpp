#include "tbgen/pipeline.hpp"

#include "tbgen/codegen.hpp"
#include "tbgen/errors.hpp"
#include "tbgen/log.hpp"
#include "tbgen/wire.hpp"

namespace tbgen {

namespace fs = std::filesystem;

std::string problem_id_for(const fs::path& dir) {
  auto norm = fs::absolute(dir).lexically_normal();
  if (norm.filename().empty()) norm = norm.parent_path();
  return norm.filename().string();
}

Problem load_problem_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw BadProblem("problem directory " + dir.string() + " does not exist");
  if (!fs::exists(dir / "spec.txt")) throw BadProblem("problem directory " + dir.string() + " has no spec.txt");
  fs::path header = fs::exists(dir / "interface.v") ? dir / "interface.v" : dir / "top.v";
  if (!fs::exists(header)) throw BadProblem("problem directory " + dir.string() + " has neither interface.v nor top.v");
  ModuleInterface iface;
  try {
    iface = parse_verilog_interface(read_text_file(header));
  } catch (const ParseError& e) {
    throw BadProblem(header.string() + ": " + e.what());
  }
  return make_problem(problem_id_for(dir), read_text_file(dir / "spec.txt"), std::move(iface));
}

Problem with_dut(Problem problem, std::string dut_source) {
  ModuleInterface dut_iface;
  try {
    dut_iface = parse_verilog_interface(dut_source);
  } catch (const ParseError& e) {
    throw BadProblem(std::string("DUT header: ") + e.what());
  }
  if (!(dut_iface == problem.interface)) {
    throw BadProblem("DUT module header does not match the problem interface of " + problem.id);
  }
  problem.dut_source = std::move(dut_source);
  return problem;
}

StageState::StageState(fs::path workdir) : file_(std::move(workdir) / "state.json") {
  doc_ = {{"completed", Json::array()}};
  if (fs::exists(file_)) {
    try {
      doc_ = read_json_file(file_);
    } catch (const std::exception&) {
      doc_ = {{"completed", Json::array()}};
    }
  }
}

bool StageState::done(const std::string& stage) const {
  const auto& c = doc_["completed"];
  return std::find(c.begin(), c.end(), stage) != c.end();
}

void StageState::mark(const std::string& stage) {
  if (!done(stage)) doc_["completed"].push_back(stage);
  save();
}

void StageState::reset() {
  doc_ = {{"completed", Json::array()}};
  save();
}

void StageState::save() const { write_text_file(file_, dump_wire(doc_)); }

namespace {

bool stimulus_files(const fs::path& w) {
  return fs::exists(w / "Testcase_Desc.txt") && fs::exists(w / "Input_signal.json");
}
bool model_files(const fs::path& w) {
  return fs::exists(w / "Reference_signal.json") && fs::exists(w / "Func_model.py") &&
         fs::exists(w / "model.json");
}

void load_stimulus(const Problem& problem, const fs::path& w, GenTbArtifacts& a) {
  a.plan.text = read_text_file(w / "Testcase_Desc.txt");
  a.suite = stimulus_from_json(read_json_file(w / "Input_signal.json"), problem.interface);
}

void load_model(const Problem& problem, const fs::path& w, GenTbArtifacts& a) {
  auto meta = read_json_file(w / "model.json");
  a.model.source = read_text_file(w / "Func_model.py");
  a.model.candidate_index = meta.at("candidate_index").get<int>();
  a.model.generation = meta.at("generation").get<int>();
  a.traces = traces_from_json(read_json_file(w / "Reference_signal.json"), problem.interface);
  check_traces_match_suite(a.traces, a.suite);
}

}  // namespace

GenTbArtifacts run_gen_tb(const Problem& problem, AgentContext& ctx, bool resume) {
  validate_problem(problem);
  if (ctx.workdir.empty()) throw ConfigError("gen-tb needs a workspace directory");
  fs::create_directories(ctx.workdir);
  auto logger = log::get("pipeline");
  StageState state(ctx.workdir);
  if (!resume) state.reset();
  GenTbArtifacts a;

  if (resume && state.done("stimulus") && stimulus_files(ctx.workdir)) {
    logger->info("{}: stimulus loaded from workspace", problem.id);
    load_stimulus(problem, ctx.workdir, a);
  } else {
    a.plan = design_scenarios(problem, ctx);
    auto scripts = generate_stimulus_scripts(problem, a.plan, ctx.settings.stimulus_samples, ctx);
    a.suite = collect_stimuli(scripts, problem.interface, ctx);
    state.mark("stimulus");
  }

  if (resume && state.done("improve") && model_files(ctx.workdir)) {
    logger->info("{}: functional model loaded from workspace", problem.id);
    load_model(problem, ctx.workdir, a);
  } else {
    ImproveConfig cfg{ctx.settings.improve_iterations, ctx.settings.emulator_samples, ctx.settings.temperature};
    auto result = improve_loop(problem, a.suite, cfg, ctx);
    a.model = result.model;
    a.traces = result.traces;
    write_text_file(ctx.workdir / "model.json",
                    dump_wire({{"candidate_index", a.model.candidate_index},
                               {"generation", a.model.generation},
                               {"rounds", result.rounds},
                               {"aligned", result.selection.aligned}}));
    state.mark("improve");
  }

  auto opts = default_codegen_options(problem.interface);
  opts.max_failures_reported = ctx.settings.max_failures_reported;
  opts.max_scenarios = ctx.settings.max_scenarios;
  opts.max_total_steps = ctx.settings.max_total_steps;
  a.testbench = emit_testbench(problem.interface, a.traces, opts);
  write_text_file(ctx.workdir / "sim_main.cpp", a.testbench);
  state.mark("codegen");
  return a;
}

GenTbArtifacts load_gen_tb(const Problem& problem, const fs::path& workdir) {
  if (!stimulus_files(workdir) || !model_files(workdir) || !fs::exists(workdir / "sim_main.cpp")) {
    throw BadProblem("no gen-tb artifacts in " + workdir.string() + "; run gen-tb first or pass --full");
  }
  GenTbArtifacts a;
  load_stimulus(problem, workdir, a);
  load_model(problem, workdir, a);
  a.testbench = read_text_file(workdir / "sim_main.cpp");
  return a;
}

ValidationResult run_verify(const Problem& problem_with_dut, const GenTbArtifacts& artifacts,
                            AgentContext& ctx, Simulator& simulator) {
  return validate_loop(problem_with_dut, artifacts.suite, artifacts.plan, artifacts.model,
                       artifacts.traces, ctx.settings.validation_budget, ctx, simulator);
}

}  // namespace tbgen
