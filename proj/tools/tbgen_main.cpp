#include <signal.h>
#include <unistd.h>

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include "tbgen/config.hpp"
#include "tbgen/errors.hpp"
#include "tbgen/eval.hpp"
#include "tbgen/log.hpp"
#include "tbgen/pipeline.hpp"
#include "tbgen/process.hpp"
#include "tbgen/validate.hpp"
#include "tbgen/wire.hpp"

namespace fs = std::filesystem;
using namespace tbgen;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitFail = 1,
  kExitBadInput = 2,
  kExitEnvironment = 3,
  kExitProvider = 4,
  kExitGeneration = 5,
  kExitInterrupted = 130,
};

int exit_code_for(const std::string& kind) {
  static const std::map<std::string, int> table = {
      {"BadProblem", kExitBadInput},       {"ParseError", kExitBadInput},
      {"ConfigError", kExitBadInput},      {"EvalInputError", kExitBadInput},
      {"ValidationError", kExitBadInput},  {"FormatError", kExitBadInput},
      {"WidthError", kExitBadInput},       {"StructureError", kExitBadInput},
      {"AmbiguousClockError", kExitBadInput},
      {"EnvironmentError", kExitEnvironment}, {"BackendError", kExitEnvironment},
      {"ProviderError", kExitProvider},    {"FixtureMissError", kExitProvider},
  };
  auto it = table.find(kind);
  return it == table.end() ? kExitGeneration : it->second;
}

// What gets written to run_meta.json / error.json, also from the interrupt
// watcher thread.
struct RunRecord {
  std::mutex mu;
  std::string command;
  std::vector<std::string> argv;
  Json config = Json::object();
  Json versions = {{"tbgen", kVersion}};
  fs::path dir;
  TokenLedger ledger;
  const Gateway* gateway = nullptr;

  Json tokens() {
    TokenLedger total = ledger;
    if (gateway) total.merge(gateway->ledger());
    Json rows = Json::array();
    for (const auto& r : ledger_report(total)) {
      rows.push_back({{"stage", r.stage}, {"prompt_tokens", r.prompt_tokens},
                      {"completion_tokens", r.completion_tokens}, {"total", r.total}});
    }
    return rows;
  }

  void write_meta(int exit_code) {
    std::lock_guard lock(mu);
    if (dir.empty()) return;
    try {
      write_text_file(dir / "run_meta.json",
                      dump_wire({{"command", command},
                                 {"argv", argv},
                                 {"config", config},
                                 {"versions", versions},
                                 {"tokens", tokens()},
                                 {"exit_code", exit_code}}));
    } catch (const std::exception& e) {
      std::cerr << "[ERROR] [cli] cannot write run_meta.json: " << e.what() << "\n";
    }
  }

  void write_error(const std::string& kind, const std::string& message) {
    std::lock_guard lock(mu);
    if (dir.empty()) return;
    try {
      write_text_file(dir / "error.json", dump_wire({{"kind", kind}, {"message", message}}));
    } catch (const std::exception&) {
    }
  }
};

RunRecord g_run;

// Publishes a live gateway to the interrupt watcher and folds its ledger in
// when the command ends, normally or by exception.
class GatewayScope {
 public:
  explicit GatewayScope(const Gateway& g) : g_(g) {
    std::lock_guard lock(g_run.mu);
    g_run.gateway = &g_;
  }
  ~GatewayScope() {
    std::lock_guard lock(g_run.mu);
    g_run.ledger.merge(g_.ledger());
    g_run.gateway = nullptr;
  }

 private:
  const Gateway& g_;
};

void start_interrupt_watcher() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::thread([set] {
    int sig = 0;
    sigwait(&set, &sig);
    log::get("cli")->warn("interrupted; saving state");
    kill_all_processes();
    g_run.write_error("Interrupted", "run interrupted by signal " + std::to_string(sig));
    g_run.write_meta(kExitInterrupted);
    ::_exit(kExitInterrupted);
  }).detach();
}

bool is_config_leaf(const std::string& dotted) {
  static const Json defaults = default_config();
  const Json* node = &defaults;
  std::size_t start = 0;
  for (;;) {
    auto dot = dotted.find('.', start);
    auto part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) return false;
    node = &(*node)[part];
    if (dot == std::string::npos) return !node->is_object();
    start = dot + 1;
  }
}

// Pulls `--config.key value` / `--config.key=value` pairs out of argv.
// Dotted flags are always treated as overrides so typos get reported.
std::vector<std::pair<std::string, std::string>> split_overrides(std::vector<std::string>& args) {
  std::vector<std::pair<std::string, std::string>> overrides;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a.rfind("--", 0) != 0) {
      rest.push_back(a);
      continue;
    }
    auto key = a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2);
    if (key.find('.') != std::string::npos || is_config_leaf(key)) {
      auto body = a.substr(2);
      if (auto eq = body.find('='); eq != std::string::npos) {
        overrides.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      } else if (i + 1 < args.size()) {
        overrides.emplace_back(body, args[++i]);
      } else {
        throw ConfigError("override " + a + " has no value");
      }
      continue;
    }
    rest.push_back(a);
  }
  args = std::move(rest);
  return overrides;
}

struct Common {
  std::optional<std::string> config_file;
  std::string log_level = "";
  std::vector<std::pair<std::string, std::string>> overrides;
};

Json resolve_config(const Common& common) {
  fs::path file;
  if (common.config_file) file = *common.config_file;
  Json config = load_config(common.config_file ? &file : nullptr, common.overrides);
  auto level = common.log_level.empty() ? config.at("log").at("level").get<std::string>() : common.log_level;
  log::set_level(spdlog::level::from_str(level));
  g_run.config = config;
  return config;
}

int cmd_gen_tb(const Common& common, const std::string& problem_dir, bool resume) {
  auto config = resolve_config(common);
  auto settings = settings_from_config(config);
  auto workdir = workspace_root(config) / problem_id_for(problem_dir);
  g_run.dir = workdir;
  fs::create_directories(workdir);
  fs::remove(workdir / "error.json");
  auto problem = load_problem_dir(problem_dir);
  auto provider = make_provider(config);
  auto backend = make_backend(config);
  g_run.versions["provider"] = provider->name();
  g_run.versions["runtime"] = backend->name();

  Gateway gateway(provider, workdir / "llm");
  GatewayScope scope(gateway);
  AgentContext ctx{gateway, *backend, settings, workdir};
  auto artifacts = run_gen_tb(problem, ctx, resume);
  std::cout << "testbench for " << problem.id << ": " << artifacts.suite.scenarios.size() << " scenarios, "
            << artifacts.suite.total_steps() << " steps, written to " << (workdir / "sim_main.cpp").string()
            << "\n";
  return kExitOk;
}

int cmd_verify(const Common& common, const std::string& problem_dir, const std::string& dut_path, bool full,
               bool resume) {
  auto config = resolve_config(common);
  auto settings = settings_from_config(config);
  auto workdir = workspace_root(config) / problem_id_for(problem_dir);
  g_run.dir = workdir;
  fs::create_directories(workdir);
  fs::remove(workdir / "error.json");
  auto problem = load_problem_dir(problem_dir);
  g_run.versions["verilator"] = probe_simulator(settings.verilator);
  if (!fs::exists(dut_path)) throw BadProblem("DUT file " + dut_path + " does not exist");
  auto with = with_dut(problem, read_text_file(dut_path));

  auto provider = make_provider(config);
  auto backend = make_backend(config);
  g_run.versions["provider"] = provider->name();
  g_run.versions["runtime"] = backend->name();
  Gateway gateway(provider, workdir / "llm");
  GatewayScope scope(gateway);
  AgentContext ctx{gateway, *backend, settings, workdir};
  auto artifacts = full ? run_gen_tb(problem, ctx, resume) : load_gen_tb(problem, workdir);
  VerilatorSimulator simulator(settings.verilator, settings.build_timeout, settings.sim_timeout);
  auto result = run_verify(with, artifacts, ctx, simulator);

  if (result.verdict.build_failed) {
    const auto& log_text = result.verdict.history.back().outcome.raw_log;
    std::cerr << log_text << "\n";
    g_run.write_error("BuildError", "testbench build failed:\n" + log_text);
  }
  std::cout << format_verdict_line(result.verdict) << "\n";
  return result.verdict.dut_status == DutStatus::PASS ? kExitOk : kExitFail;
}

int cmd_eval(const Common& common, const std::string& corpus_dir, std::vector<int> alphas, bool resume) {
  auto config = resolve_config(common);
  auto settings = settings_from_config(config);
  auto root = workspace_root(config) / "eval";
  g_run.dir = root;
  fs::create_directories(root);
  fs::remove(root / "error.json");
  auto corpus = load_corpus(corpus_dir);
  g_run.versions["verilator"] = probe_simulator(settings.verilator);
  auto provider = make_provider(config);
  auto backend = make_backend(config);
  g_run.versions["provider"] = provider->name();
  g_run.versions["runtime"] = backend->name();
  VerilatorSimulator simulator(settings.verilator, settings.build_timeout, settings.sim_timeout);

  if (alphas.empty()) alphas = {80, 100};
  BenchmarkOptions options{alphas, resume, root};
  auto report = run_benchmark(corpus, options, {provider, *backend, simulator, settings}, &g_run.ledger);
  std::cout << format_report_table(report);
  std::cout << "report: " << (root / "eval_report.json").string() << "\n";
  return kExitOk;
}

int cmd_derive(const Common& common, const std::string& corpus_dir) {
  auto config = resolve_config(common);
  auto settings = settings_from_config(config);
  auto root = workspace_root(config) / "derive";
  g_run.dir = root;
  fs::create_directories(root);
  g_run.versions["verilator"] = probe_simulator(settings.verilator);
  VerilatorSimulator simulator(settings.verilator, settings.build_timeout, settings.sim_timeout);
  int n = derive_verdicts(corpus_dir, simulator, root);
  std::cout << n << " mutant verdicts written\n";
  return kExitOk;
}

int cmd_fixtures(const Common& common, const std::string& action, const std::string& log_dir,
                 const std::string& store) {
  resolve_config(common);
  g_run.dir = store;
  fs::create_directories(store);
  if (action == "record") {
    int n = record_fixtures(log_dir, store);
    std::cout << n << " fixtures written to " << store << "\n";
    return kExitOk;
  }
  auto check = check_fixtures(log_dir, store);
  std::cout << check.checked << " calls checked, " << check.missing.size() << " missing, "
            << check.mismatched.size() << " mismatched\n";
  for (const auto& m : check.missing) std::cout << "missing: " << m << "\n";
  for (const auto& m : check.mismatched) std::cout << "mismatched: " << m << "\n";
  return check.missing.empty() && check.mismatched.empty() ? kExitOk : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  start_interrupt_watcher();
  std::vector<std::string> args(argv + 1, argv + argc);
  g_run.argv = args;

  Common common;
  try {
    common.overrides = split_overrides(args);
  } catch (const Error& e) {
    std::cerr << "[ERROR] [cli] " << e.what() << "\n";
    return kExitBadInput;
  }

  CLI::App app{"Agent-driven testbench generation and validation for Verilog modules"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", common.config_file, "JSON configuration file");
  app.add_option("--log-level", common.log_level, "trace, debug, info, warn, error");
  app.footer("Any configuration key can be overridden as --<dotted.key> <value>, e.g. --provider.kind fixture.");

  std::string problem_dir, dut_path, corpus_dir, action, log_dir, store;
  bool resume = false, full = false;
  std::vector<int> alphas;

  auto* gen = app.add_subcommand("gen-tb", "generate stimulus, functional model and testbench for a problem");
  gen->add_option("problem_dir", problem_dir, "directory with spec.txt and top.v or interface.v")->required();
  gen->add_flag("--resume", resume, "reuse completed stages of the workspace");

  auto* verify = app.add_subcommand("verify", "validate a DUT against the generated testbench");
  verify->add_option("problem_dir", problem_dir, "problem directory")->required();
  verify->add_option("--dut", dut_path, "Verilog source of the design under test")->required();
  verify->add_flag("--full", full, "run gen-tb first");
  verify->add_flag("--resume", resume, "with --full, reuse completed stages");

  auto* eval = app.add_subcommand("eval", "benchmark over a corpus of problems with mutants");
  eval->add_option("--corpus", corpus_dir, "corpus root")->required();
  eval->add_option("--alpha", alphas, "Eval2 agreement threshold in percent (repeatable)")
      ->check(CLI::Range(0, 100));
  eval->add_flag("--resume", resume, "reuse problems finished by an earlier sweep");

  auto* derive = app.add_subcommand("derive-verdicts", "label corpus mutants with the corpus testbench");
  derive->add_option("--corpus", corpus_dir, "corpus root")->required();

  auto* fixtures = app.add_subcommand("fixtures", "turn call logs into replay fixtures, or check them");
  fixtures->add_option("action", action, "record or check")->required()->check(CLI::IsMember({"record", "check"}));
  fixtures->add_option("--log", log_dir, "call-log directory (a workspace llm/ dir or a tree of them)")->required();
  fixtures->add_option("--store", store, "fixture directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitBadInput;
  }

  g_run.command = app.get_subcommands().front()->get_name();
  int rc = kExitOk;
  try {
    if (gen->parsed()) rc = cmd_gen_tb(common, problem_dir, resume);
    else if (verify->parsed()) rc = cmd_verify(common, problem_dir, dut_path, full, resume);
    else if (eval->parsed()) rc = cmd_eval(common, corpus_dir, alphas, resume);
    else if (derive->parsed()) rc = cmd_derive(common, corpus_dir);
    else rc = cmd_fixtures(common, action, log_dir, store);
  } catch (const Error& e) {
    log::get("cli")->error("{}: {}", e.kind(), e.what());
    g_run.write_error(e.kind(), e.what());
    rc = exit_code_for(e.kind());
  } catch (const std::exception& e) {
    log::get("cli")->error("{}", e.what());
    g_run.write_error("InternalError", e.what());
    rc = kExitGeneration;
  }
  g_run.write_meta(rc);
  return rc;
}
