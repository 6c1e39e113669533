#include "tbgen/llm.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <iomanip>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <openssl/evp.h>

#include "tbgen/errors.hpp"
#include "tbgen/log.hpp"
#include "tbgen/wire.hpp"

namespace tbgen {

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::stimulus: return "stimulus";
    case Stage::emulator: return "emulator";
    case Stage::self_improve: return "self_improve";
    case Stage::judge_validate: return "judge_validate";
  }
  return "unknown";
}

void validate_params(const SamplingParams& params) {
  if (params.n_samples < 1) throw ConfigError("n_samples must be at least 1");
  if (params.max_tokens < 1) throw ConfigError("max_tokens must be at least 1");
  if (!(params.temperature >= 0)) throw ConfigError("temperature must be non-negative");
}

TokenLedger::TokenLedger(const TokenLedger& other) {
  std::lock_guard lock(other.mu_);
  usage_ = other.usage_;
}

TokenLedger& TokenLedger::operator=(const TokenLedger& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  usage_ = other.usage_;
  return *this;
}

void TokenLedger::add(Stage stage, long long prompt_tokens, long long completion_tokens) {
  std::lock_guard lock(mu_);
  auto& u = usage_[stage];
  u.prompt_tokens += std::max(0LL, prompt_tokens);
  u.completion_tokens += std::max(0LL, completion_tokens);
}

void TokenLedger::merge(const TokenLedger& other) {
  for (Stage s : kAllStages) {
    auto u = other.usage(s);
    add(s, u.prompt_tokens, u.completion_tokens);
  }
}

StageUsage TokenLedger::usage(Stage stage) const {
  std::lock_guard lock(mu_);
  auto it = usage_.find(stage);
  return it == usage_.end() ? StageUsage{} : it->second;
}

std::vector<LedgerRow> ledger_report(const TokenLedger& ledger) {
  std::vector<LedgerRow> rows;
  for (Stage s : kAllStages) {
    auto u = ledger.usage(s);
    rows.push_back({std::string(stage_name(s)), u.prompt_tokens, u.completion_tokens,
                    u.prompt_tokens + u.completion_tokens});
  }
  return rows;
}

std::string format_ledger_report(const std::vector<LedgerRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "stage" << std::right << std::setw(14) << "prompt"
     << std::setw(14) << "completion" << std::setw(14) << "total" << "\n";
  long long p = 0, c = 0;
  for (const auto& r : rows) {
    os << std::left << std::setw(16) << r.stage << std::right << std::setw(14) << r.prompt_tokens
       << std::setw(14) << r.completion_tokens << std::setw(14) << r.total << "\n";
    p += r.prompt_tokens;
    c += r.completion_tokens;
  }
  os << std::left << std::setw(16) << "all" << std::right << std::setw(14) << p << std::setw(14)
     << c << std::setw(14) << p + c << "\n";
  return os.str();
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string prompt_key(const PromptBundle& prompt) {
  Json shots = Json::array();
  for (const auto& [in, out] : prompt.few_shots) shots.push_back(Json::array({in, out}));
  Json doc = {{"system", prompt.system}, {"user", prompt.user}, {"few_shots", shots}};
  return sha256_hex(doc.dump());
}

namespace {

std::string trim_copy(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_blank_lines(const std::vector<std::string>& lines) {
  std::size_t b = 0, e = lines.size();
  while (b < e && trim_copy(lines[b]).empty()) ++b;
  while (e > b && trim_copy(lines[e - 1]).empty()) --e;
  std::string out;
  for (std::size_t i = b; i < e; ++i) {
    if (i > b) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

}  // namespace

std::string extract_code_block(std::string_view text, std::string_view fence_tag) {
  struct Block {
    std::string info;
    std::string body;
  };
  std::vector<Block> blocks;
  std::istringstream in{std::string(text)};
  std::string line;
  std::optional<Block> open;
  std::vector<std::string> body;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto t = trim_copy(line);
    if (t.rfind("```", 0) == 0) {
      if (open) {
        if (t == "```") {
          open->body = strip_blank_lines(body);
          blocks.push_back(std::move(*open));
          open.reset();
          body.clear();
          continue;
        }
      } else {
        auto info = trim_copy(t.substr(3));
        if (auto sp = info.find_first_of(" \t"); sp != std::string::npos) info.resize(sp);
        open = Block{info, {}};
        continue;
      }
    }
    if (open) body.push_back(line);
  }
  if (blocks.empty()) throw ExtractionError("completion contains no fenced code block", std::string(text));
  for (const auto& b : blocks) {
    if (b.info == fence_tag) return b.body;
  }
  return blocks.front().body;
}

FixtureProvider::FixtureProvider(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_)) {
    throw ConfigError("fixture store " + dir_.string() + " is not a directory");
  }
}

std::filesystem::path FixtureProvider::fixture_path(const std::filesystem::path& dir,
                                                    const std::string& key, int sample_index) {
  return dir / (key + "." + std::to_string(sample_index) + ".json");
}

Completion FixtureProvider::complete_one(const PromptBundle& prompt, const SamplingParams&,
                                         int sample_index) {
  auto path = fixture_path(dir_, prompt_key(prompt), sample_index);
  if (!std::filesystem::exists(path)) {
    throw FixtureMissError("no fixture " + path.filename().string() + " in " + dir_.string());
  }
  Json doc = read_json_file(path);
  Completion c;
  c.text = doc.at("text").get<std::string>();
  c.prompt_tokens = doc.value("prompt_tokens", 0LL);
  c.completion_tokens = doc.value("completion_tokens", 0LL);
  return c;
}

RemoteProvider::RemoteProvider(RemoteConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw ConfigError("provider.endpoint is required for remote");
  if (config_.model.empty()) throw ConfigError("provider.model is required for remote");
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (!key || !*key) {
    throw ConfigError("environment variable " + config_.api_key_env + " holds no API key");
  }
  api_key_ = key;
}

namespace {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint '" + url + "' has no scheme");
  auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

Completion RemoteProvider::complete_one(const PromptBundle& prompt, const SamplingParams& params,
                                        int) {
  Json messages = Json::array();
  if (!prompt.system.empty()) messages.push_back({{"role", "system"}, {"content", prompt.system}});
  for (const auto& [in, out] : prompt.few_shots) {
    messages.push_back({{"role", "user"}, {"content", in}});
    messages.push_back({{"role", "assistant"}, {"content", out}});
  }
  messages.push_back({{"role", "user"}, {"content", prompt.user}});
  Json body = {{"model", config_.model},
               {"messages", messages},
               {"temperature", params.temperature},
               {"max_tokens", params.max_tokens}};

  auto ep = split_endpoint(config_.endpoint);
  httplib::Client client(ep.base);
  auto timeout = std::chrono::milliseconds(static_cast<long long>(config_.timeout_s * 1000));
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
  httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) {
      auto wait = std::chrono::milliseconds(config_.backoff_base_ms) * (1 << (attempt - 1));
      log::get("llm")->warn("retrying after {} ({} ms)", last_error, wait.count());
      std::this_thread::sleep_for(wait);
    }
    auto res = client.Post(ep.path, headers, body.dump(), "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status >= 400) {
      throw ProviderError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));
    }
    try {
      Json reply = Json::parse(res->body);
      Completion c;
      c.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
      if (auto u = reply.find("usage"); u != reply.end()) {
        c.prompt_tokens = u->value("prompt_tokens", 0LL);
        c.completion_tokens = u->value("completion_tokens", 0LL);
      }
      return c;
    } catch (const Json::exception& e) {
      throw ProviderError(std::string("malformed provider reply: ") + e.what());
    }
  }
  throw ProviderError("provider unavailable after " + std::to_string(config_.retries) +
                      " retries: " + last_error);
}

Gateway::Gateway(std::shared_ptr<Provider> provider, std::optional<std::filesystem::path> log_dir)
    : provider_(std::move(provider)), log_dir_(std::move(log_dir)) {
  if (log_dir_ && std::filesystem::is_directory(*log_dir_)) {
    int existing = 0;
    for (const auto& e : std::filesystem::directory_iterator(*log_dir_)) {
      if (e.is_regular_file() && e.path().extension() == ".json") ++existing;
    }
    seq_ = existing;
  }
}

std::vector<Completion> Gateway::complete(const PromptBundle& prompt, const SamplingParams& params,
                                          Stage stage, int first_index) {
  validate_params(params);
  if (prompt.user.empty()) throw ConfigError("prompt has an empty user message");
  std::vector<std::future<Completion>> futures;
  futures.reserve(params.n_samples);
  for (int i = 0; i < params.n_samples; ++i) {
    int idx = first_index + i;
    futures.push_back(std::async(std::launch::async, [this, &prompt, &params, stage, idx] {
      Completion c = provider_->complete_one(prompt, params, idx);
      ledger_.add(stage, c.prompt_tokens, c.completion_tokens);
      persist(prompt, params, stage, idx, c);
      return c;
    }));
  }
  // Join every request before rethrowing so no task outlives the prompt.
  std::vector<Completion> out;
  std::exception_ptr first_error;
  for (auto& f : futures) {
    try {
      out.push_back(f.get());
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

void Gateway::persist(const PromptBundle& prompt, const SamplingParams& params, Stage stage,
                      int sample_index, const Completion& c) {
  if (!log_dir_) return;
  int seq = seq_.fetch_add(1);
  Json shots = Json::array();
  for (const auto& [in, out] : prompt.few_shots) shots.push_back(Json::array({in, out}));
  Json doc = {{"stage", stage_name(stage)},
              {"key", prompt_key(prompt)},
              {"sample_index", sample_index},
              {"temperature", params.temperature},
              {"system", prompt.system},
              {"user", prompt.user},
              {"few_shots", shots},
              {"text", c.text},
              {"prompt_tokens", c.prompt_tokens},
              {"completion_tokens", c.completion_tokens}};
  char name[64];
  std::snprintf(name, sizeof name, "%04d_%s_s%d.json", seq, std::string(stage_name(stage)).c_str(),
                sample_index);
  write_text_file(*log_dir_ / name, dump_wire(doc));
}

namespace {

template <typename Fn>
void for_each_log_entry(const std::filesystem::path& log_dir, Fn&& fn) {
  if (!std::filesystem::is_directory(log_dir)) {
    throw ConfigError(log_dir.string() + " is not a call-log directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(log_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json" &&
        e.path().parent_path().filename() == "llm") {
      files.push_back(e.path());
    }
  }
  // A bare llm/ directory may be passed directly.
  if (files.empty() && log_dir.filename() == "llm") {
    for (const auto& e : std::filesystem::directory_iterator(log_dir)) {
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) fn(f, read_json_file(f));
}

}  // namespace

int record_fixtures(const std::filesystem::path& log_dir, const std::filesystem::path& store) {
  int written = 0;
  std::filesystem::create_directories(store);
  for_each_log_entry(log_dir, [&](const std::filesystem::path&, const Json& doc) {
    Json fixture = {{"text", doc.at("text")},
                    {"prompt_tokens", doc.value("prompt_tokens", 0LL)},
                    {"completion_tokens", doc.value("completion_tokens", 0LL)}};
    write_text_file(FixtureProvider::fixture_path(store, doc.at("key").get<std::string>(),
                                                  doc.at("sample_index").get<int>()),
                    dump_wire(fixture));
    ++written;
  });
  return written;
}

TokenLedger ledger_from_log(const std::filesystem::path& log_dir) {
  TokenLedger ledger;
  if (!std::filesystem::is_directory(log_dir)) return ledger;
  for_each_log_entry(log_dir, [&](const std::filesystem::path& file, const Json& doc) {
    auto name = doc.at("stage").get<std::string>();
    auto it = std::find_if(kAllStages.begin(), kAllStages.end(),
                           [&](Stage s) { return stage_name(s) == name; });
    if (it == kAllStages.end()) throw ConfigError(file.string() + ": unknown stage '" + name + "'");
    ledger.add(*it, doc.value("prompt_tokens", 0LL), doc.value("completion_tokens", 0LL));
  });
  return ledger;
}

FixtureCheck check_fixtures(const std::filesystem::path& log_dir,
                            const std::filesystem::path& store) {
  FixtureCheck result;
  for_each_log_entry(log_dir, [&](const std::filesystem::path& file, const Json& doc) {
    ++result.checked;
    auto path = FixtureProvider::fixture_path(store, doc.at("key").get<std::string>(),
                                              doc.at("sample_index").get<int>());
    if (!std::filesystem::exists(path)) {
      result.missing.push_back(file.string());
      return;
    }
    if (read_json_file(path).at("text") != doc.at("text")) result.mismatched.push_back(file.string());
  });
  return result;
}

}  // namespace tbgen
