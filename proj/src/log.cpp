#include "tbgen/log.hpp"

#include <atomic>
#include <cctype>
#include <mutex>

#include <spdlog/pattern_formatter.h>
#include <spdlog/sinks/stdout_sinks.h>

namespace tbgen::log {

namespace {

class UpperLevelFlag final : public spdlog::custom_flag_formatter {
 public:
  void format(const spdlog::details::log_msg& msg, const std::tm&,
              spdlog::memory_buf_t& dest) override {
    auto name = spdlog::level::to_string_view(msg.level);
    for (char c : name) dest.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  std::unique_ptr<custom_flag_formatter> clone() const override {
    return std::make_unique<UpperLevelFlag>();
  }
};

std::mutex g_mu;
std::atomic<spdlog::level::level_enum> g_level{spdlog::level::info};

std::shared_ptr<spdlog::sinks::stderr_sink_mt> shared_sink() {
  static auto sink = [] {
    auto s = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    auto formatter = std::make_unique<spdlog::pattern_formatter>();
    formatter->add_flag<UpperLevelFlag>('*').set_pattern("[%*] [%n] %v");
    s->set_formatter(std::move(formatter));
    return s;
  }();
  return sink;
}

}  // namespace

std::shared_ptr<spdlog::logger> get(const std::string& stage) {
  std::lock_guard lock(g_mu);
  if (auto existing = spdlog::get(stage)) return existing;
  auto logger = std::make_shared<spdlog::logger>(stage, shared_sink());
  logger->set_level(g_level.load());
  spdlog::register_logger(logger);
  return logger;
}

void set_level(spdlog::level::level_enum level) {
  std::lock_guard lock(g_mu);
  g_level = level;
  spdlog::apply_all([level](const std::shared_ptr<spdlog::logger>& l) { l->set_level(level); });
}

}  // namespace tbgen::log
