#pragma once

#include <memory>
#include <string>

#include <spdlog/spdlog.h>

namespace tbgen::log {

/// Stage logger writing `[LEVEL] [stage] message` lines to stderr.
std::shared_ptr<spdlog::logger> get(const std::string& stage);

/// Applies to existing and future stage loggers.
void set_level(spdlog::level::level_enum level);

}  // namespace tbgen::log
