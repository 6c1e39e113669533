#pragma once

#include <chrono>
#include <filesystem>
#include <string>

namespace tbgen {

// Exit codes of the script tails (cross-language protocol).
inline constexpr int kTailOk = 0;
inline constexpr int kTailMalformed = 10;
inline constexpr int kTailMissingEntry = 11;
inline constexpr int kTailRaised = 12;

struct ScriptRun {
  int exit_code = -1;
  bool timed_out = false;
  std::string diagnostics;  // stderr or backend note
  std::string output;       // JSON document text, present when ok()

  bool ok() const { return !timed_out && exit_code == kTailOk; }
  std::string describe() const;
};

/// Executes generated stimulus and emulator scripts in isolation.
class ScriptBackend {
 public:
  virtual ~ScriptBackend() = default;
  /// Output follows the Input_signal.json schema.
  virtual ScriptRun run_stimulus(const std::string& source, std::chrono::milliseconds timeout) = 0;
  /// Output follows the Reference_signal.json schema.
  virtual ScriptRun run_emulator(const std::string& source, const std::string& input_json,
                                 std::chrono::milliseconds timeout) = 0;
  /// Throws BackendError when the backend cannot run anything.
  virtual void probe() = 0;
  virtual std::string name() const = 0;
};

/// Invokes `<interpreter> stimulus_tail.py <script> <out>` and
/// `<interpreter> emulator_tail.py <script> <in> <out>` inside a throwaway
/// working directory.
class PythonTailBackend final : public ScriptBackend {
 public:
  PythonTailBackend(std::string interpreter, std::filesystem::path tail_dir);
  ScriptRun run_stimulus(const std::string& source, std::chrono::milliseconds timeout) override;
  ScriptRun run_emulator(const std::string& source, const std::string& input_json,
                         std::chrono::milliseconds timeout) override;
  void probe() override;
  std::string name() const override { return "python"; }

 private:
  std::string interpreter_;
  std::filesystem::path tail_dir_;
};

/// Replays recorded script outputs keyed by the sha256 of the script source:
/// <dir>/<sha>.stimulus.json and <dir>/<sha>.trace.json. A miss reports the
/// raised-exception exit code.
class FixtureBackend final : public ScriptBackend {
 public:
  explicit FixtureBackend(std::filesystem::path dir);
  ScriptRun run_stimulus(const std::string& source, std::chrono::milliseconds timeout) override;
  ScriptRun run_emulator(const std::string& source, const std::string& input_json,
                         std::chrono::milliseconds timeout) override;
  void probe() override;
  std::string name() const override { return "fixture"; }

  static std::filesystem::path stimulus_path(const std::filesystem::path& dir,
                                             const std::string& source);
  static std::filesystem::path trace_path(const std::filesystem::path& dir,
                                          const std::string& source);

 private:
  std::filesystem::path dir_;
};

}  // namespace tbgen
