#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "tbgen/signals.hpp"

namespace tbgen {

using Json = nlohmann::json;

// Input_signal.json:
//   [ {"scenario": id, "steps": [ {"<port>": "<binary>", ...}, ... ]}, ... ]
// Reference_signal.json / Reference_signal_candidate_<i>.json:
//   [ {"scenario": id, "steps": [ {"inputs": {...}, "outputs": {...}}, ... ]}, ... ]
// Values are unprefixed MSB-first binary strings of exact port width.

Json stimulus_to_json(const StimulusSuite& suite);
/// Strict reader; throws FormatError/WidthError/ValidationError.
StimulusSuite stimulus_from_json(const Json& doc, const ModuleInterface& iface);

Json traces_to_json(const TraceSet& traces);
TraceSet traces_from_json(const Json& doc, const ModuleInterface& iface);

Json signal_map_to_json(const SignalMap& values);

/// Sorted keys, two-space indent, trailing newline.
std::string dump_wire(const Json& doc);

Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace tbgen
