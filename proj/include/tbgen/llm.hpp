#pragma once

#include <array>
#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tbgen {

enum class Stage { stimulus, emulator, self_improve, judge_validate };

inline constexpr std::array<Stage, 4> kAllStages = {Stage::stimulus, Stage::emulator,
                                                    Stage::self_improve, Stage::judge_validate};

std::string_view stage_name(Stage stage);

struct SamplingParams {
  double temperature = 0.3;
  int n_samples = 1;
  int max_tokens = 4096;
};

/// Throws ConfigError on n_samples < 1, max_tokens < 1 or negative temperature.
void validate_params(const SamplingParams& params);

struct PromptBundle {
  std::string system;
  std::string user;
  std::vector<std::pair<std::string, std::string>> few_shots;  // (input, output)
};

struct Completion {
  std::string text;
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
};

struct StageUsage {
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
};

/// Per-stage token accounting. Thread-safe; counts only ever grow.
class TokenLedger {
 public:
  TokenLedger() = default;
  TokenLedger(const TokenLedger& other);
  TokenLedger& operator=(const TokenLedger& other);

  void add(Stage stage, long long prompt_tokens, long long completion_tokens);
  void merge(const TokenLedger& other);
  StageUsage usage(Stage stage) const;

 private:
  mutable std::mutex mu_;
  std::map<Stage, StageUsage> usage_;
};

struct LedgerRow {
  std::string stage;
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
  long long total = 0;
};

/// One row per stage in declaration order, zero rows included.
std::vector<LedgerRow> ledger_report(const TokenLedger& ledger);
std::string format_ledger_report(const std::vector<LedgerRow>& rows);

std::string sha256_hex(std::string_view data);

/// Stable hash of (system, user, few_shots); names fixture files.
std::string prompt_key(const PromptBundle& prompt);

/// Body of the first fenced block tagged `fence_tag`, else of the first fenced
/// block of any tag, with surrounding blank lines removed. Throws
/// ExtractionError when the text has no complete fenced block.
std::string extract_code_block(std::string_view completion_text, std::string_view fence_tag);

class Provider {
 public:
  virtual ~Provider() = default;
  virtual Completion complete_one(const PromptBundle& prompt, const SamplingParams& params,
                                  int sample_index) = 0;
  virtual std::string name() const = 0;
};

/// Replays <dir>/<prompt_key>.<sample_index>.json files. Never substitutes:
/// a missing file raises FixtureMissError.
class FixtureProvider final : public Provider {
 public:
  explicit FixtureProvider(std::filesystem::path dir);
  Completion complete_one(const PromptBundle& prompt, const SamplingParams& params,
                          int sample_index) override;
  std::string name() const override { return "fixture"; }

  static std::filesystem::path fixture_path(const std::filesystem::path& dir,
                                            const std::string& key, int sample_index);

 private:
  std::filesystem::path dir_;
};

struct RemoteConfig {
  std::string endpoint;  // e.g. https://api.example.com/v1/chat/completions
  std::string model;
  std::string api_key_env = "PROV_API_KEY";
  double timeout_s = 120;
  int retries = 3;
  int backoff_base_ms = 1000;  // doubles on each retry
};

/// OpenAI-style chat-completions over HTTP(S). Retries transport errors and
/// 5xx responses with exponential backoff; 4xx fails immediately.
class RemoteProvider final : public Provider {
 public:
  explicit RemoteProvider(RemoteConfig config);
  Completion complete_one(const PromptBundle& prompt, const SamplingParams& params,
                          int sample_index) override;
  std::string name() const override { return "remote:" + config_.model; }

 private:
  RemoteConfig config_;
  std::string api_key_;
};

/// Front door for all model calls of one problem run: fans out samples,
/// keeps the token ledger, and persists every prompt/completion pair.
class Gateway {
 public:
  explicit Gateway(std::shared_ptr<Provider> provider,
                   std::optional<std::filesystem::path> log_dir = std::nullopt);

  /// Exactly params.n_samples completions, sample indices
  /// first_index .. first_index + n_samples - 1, issued concurrently.
  std::vector<Completion> complete(const PromptBundle& prompt, const SamplingParams& params,
                                   Stage stage, int first_index = 0);

  const TokenLedger& ledger() const { return ledger_; }
  Provider& provider() { return *provider_; }

 private:
  void persist(const PromptBundle& prompt, const SamplingParams& params, Stage stage,
               int sample_index, const Completion& c);

  std::shared_ptr<Provider> provider_;
  std::optional<std::filesystem::path> log_dir_;
  TokenLedger ledger_;
  std::atomic<int> seq_{0};
};

/// Converts a run's persisted call log into fixture files. Returns the
/// number written.
int record_fixtures(const std::filesystem::path& log_dir, const std::filesystem::path& store);

/// Re-sums a persisted call log; empty when the directory does not exist.
TokenLedger ledger_from_log(const std::filesystem::path& log_dir);

struct FixtureCheck {
  int checked = 0;
  std::vector<std::string> missing;     // log entries with no fixture file
  std::vector<std::string> mismatched;  // fixture text differs from the log
};
FixtureCheck check_fixtures(const std::filesystem::path& log_dir,
                            const std::filesystem::path& store);

}  // namespace tbgen
