#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "tbgen/context.hpp"
#include "tbgen/llm.hpp"
#include "tbgen/runtime.hpp"
#include "tbgen/wire.hpp"

namespace tbgen {

/// The full run configuration as a JSON document. Every leaf has a default
/// and can be overridden by `--<dotted.key> <value>` on the command line.
Json default_config();

/// Defaults, then the file (if any), then overrides in order. Unknown keys
/// and secrets in the document are ConfigErrors.
Json load_config(const std::filesystem::path* file,
                 const std::vector<std::pair<std::string, std::string>>& overrides);

/// Sets one dotted key. The value is parsed as JSON when it matches the type
/// of the existing leaf (numbers, booleans), otherwise kept as a string.
void apply_override(Json& config, const std::string& dotted_key, const std::string& value);

Settings settings_from_config(const Json& config);

/// provider.kind = "fixture" | "remote".
std::shared_ptr<Provider> make_provider(const Json& config);

/// runtime.kind = "python" | "fixture".
std::unique_ptr<ScriptBackend> make_backend(const Json& config);

std::filesystem::path workspace_root(const Json& config);

}  // namespace tbgen
