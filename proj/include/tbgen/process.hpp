#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace tbgen {

struct ProcessOptions {
  std::filesystem::path cwd;  // empty: inherit
  std::chrono::milliseconds timeout{60000};
  std::vector<std::pair<std::string, std::string>> env;  // added to / overriding the parent env
  std::size_t max_capture = 8u << 20;                     // per stream, excess dropped
};

struct ProcessResult {
  int exit_code = -1;   // valid when the child exited normally
  int term_signal = 0;  // nonzero when killed by a signal
  bool timed_out = false;
  bool spawn_failed = false;  // exec itself failed; see err
  std::string out;
  std::string err;

  bool ok() const { return !timed_out && !spawn_failed && term_signal == 0 && exit_code == 0; }
};

/// Runs argv[0] (PATH lookup) in its own process group, capturing stdout and
/// stderr. On timeout the whole group is killed with SIGKILL.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options);

/// SIGKILLs the process group of every child started by run_process that
/// is still running.
void kill_all_processes();

}  // namespace tbgen
