#include "tbgen/runtime.hpp"

#include <cstdlib>

#include "tbgen/errors.hpp"
#include "tbgen/llm.hpp"
#include "tbgen/process.hpp"
#include "tbgen/wire.hpp"

namespace tbgen {

std::string ScriptRun::describe() const {
  if (timed_out) return "timed out";
  std::string what;
  switch (exit_code) {
    case kTailOk: what = "ok"; break;
    case kTailMalformed: what = "malformed return value (exit 10)"; break;
    case kTailMissingEntry: what = "missing entry point (exit 11)"; break;
    case kTailRaised: what = "script raised (exit 12)"; break;
    default: what = "exit " + std::to_string(exit_code); break;
  }
  if (!diagnostics.empty()) what += ": " + diagnostics.substr(0, 2000);
  return what;
}

namespace {

class ScratchDir {
 public:
  ScratchDir() {
    auto pattern = (std::filesystem::temp_directory_path() / "tbgen-run-XXXXXX").string();
    if (!::mkdtemp(pattern.data())) throw BackendError("cannot create scratch directory");
    path_ = pattern;
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

ScriptRun collect(const ProcessResult& pr, const std::filesystem::path& out_file) {
  ScriptRun run;
  run.timed_out = pr.timed_out;
  run.exit_code = pr.spawn_failed ? 127 : pr.term_signal ? 128 + pr.term_signal : pr.exit_code;
  run.diagnostics = pr.err;
  if (run.ok()) {
    if (std::filesystem::exists(out_file)) {
      run.output = read_text_file(out_file);
    } else {
      run.exit_code = kTailMalformed;
      run.diagnostics += "tail exited 0 without writing its output file";
    }
  }
  return run;
}

}  // namespace

PythonTailBackend::PythonTailBackend(std::string interpreter, std::filesystem::path tail_dir)
    : interpreter_(std::move(interpreter)), tail_dir_(std::filesystem::absolute(tail_dir)) {}

ScriptRun PythonTailBackend::run_stimulus(const std::string& source,
                                          std::chrono::milliseconds timeout) {
  ScratchDir scratch;
  write_text_file(scratch.path() / "Stimuli_Gen.py", source);
  auto out = scratch.path() / "Input_signal.json";
  ProcessOptions opts;
  opts.cwd = scratch.path();
  opts.timeout = timeout;
  auto pr = run_process({interpreter_, (tail_dir_ / "stimulus_tail.py").string(),
                         (scratch.path() / "Stimuli_Gen.py").string(), out.string()},
                        opts);
  return collect(pr, out);
}

ScriptRun PythonTailBackend::run_emulator(const std::string& source, const std::string& input_json,
                                          std::chrono::milliseconds timeout) {
  ScratchDir scratch;
  write_text_file(scratch.path() / "Func_candidate.py", source);
  write_text_file(scratch.path() / "Input_signal.json", input_json);
  auto out = scratch.path() / "Reference_signal.json";
  ProcessOptions opts;
  opts.cwd = scratch.path();
  opts.timeout = timeout;
  auto pr = run_process({interpreter_, (tail_dir_ / "emulator_tail.py").string(),
                         (scratch.path() / "Func_candidate.py").string(),
                         (scratch.path() / "Input_signal.json").string(), out.string()},
                        opts);
  return collect(pr, out);
}

void PythonTailBackend::probe() {
  for (const char* tail : {"stimulus_tail.py", "emulator_tail.py"}) {
    if (!std::filesystem::exists(tail_dir_ / tail)) {
      throw BackendError("runtime tail " + (tail_dir_ / tail).string() + " not found");
    }
  }
  ProcessOptions opts;
  opts.timeout = std::chrono::seconds(10);
  auto pr = run_process({interpreter_, "--version"}, opts);
  if (!pr.ok()) throw BackendError("interpreter '" + interpreter_ + "' is not runnable: " + pr.err);
}

FixtureBackend::FixtureBackend(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path FixtureBackend::stimulus_path(const std::filesystem::path& dir,
                                                    const std::string& source) {
  return dir / (sha256_hex(source) + ".stimulus.json");
}

std::filesystem::path FixtureBackend::trace_path(const std::filesystem::path& dir,
                                                 const std::string& source) {
  return dir / (sha256_hex(source) + ".trace.json");
}

namespace {

ScriptRun replay(const std::filesystem::path& path) {
  ScriptRun run;
  if (!std::filesystem::exists(path)) {
    run.exit_code = kTailRaised;
    run.diagnostics = "no runtime fixture " + path.filename().string();
    return run;
  }
  run.exit_code = kTailOk;
  run.output = read_text_file(path);
  return run;
}

}  // namespace

ScriptRun FixtureBackend::run_stimulus(const std::string& source, std::chrono::milliseconds) {
  return replay(stimulus_path(dir_, source));
}

ScriptRun FixtureBackend::run_emulator(const std::string& source, const std::string&,
                                       std::chrono::milliseconds) {
  return replay(trace_path(dir_, source));
}

void FixtureBackend::probe() {
  if (!std::filesystem::is_directory(dir_)) {
    throw BackendError("runtime fixture directory " + dir_.string() + " does not exist");
  }
}

}  // namespace tbgen
