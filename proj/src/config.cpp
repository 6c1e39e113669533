#include "tbgen/config.hpp"

#include "tbgen/errors.hpp"

namespace tbgen {

Json default_config() {
  return Json::parse(R"({
    "provider": {
      "kind": "remote",
      "endpoint": "https://api.openai.com/v1/chat/completions",
      "model": "gpt-4o",
      "api_key_env": "PROV_API_KEY",
      "timeout_s": 120,
      "retries": 3,
      "fixture_dir": ""
    },
    "runtime": {
      "kind": "python",
      "interpreter": "python3",
      "tail_dir": "runtime",
      "fixture_dir": ""
    },
    "workspace": "tbgen_work",
    "stimulus_samples": 3,
    "emulator_samples": 5,
    "improve_iterations": 3,
    "temperature": 0.3,
    "validation_budget": 2,
    "max_tokens": 4096,
    "workers": {"candidates": 4, "problems": 2},
    "timeouts": {"stimulus_s": 30, "candidate_s": 30, "build_s": 300, "sim_s": 60},
    "limits": {"max_scenarios": 256, "max_total_steps": 4096, "max_failures_reported": 64},
    "simulator": {"verilator": "verilator"},
    "log": {"level": "info"}
  })");
}

namespace {

void merge_into(Json& base, const Json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw ConfigError("configuration" + (prefix.empty() ? "" : " key '" + prefix + "'") + " must be an object");
  for (const auto& [key, value] : patch.items()) {
    std::string path = prefix.empty() ? key : prefix + "." + key;
    if (key.find("api_key") != std::string::npos && key != "api_key_env") {
      throw ConfigError("'" + path + "': API keys are read from the environment only (see provider.api_key_env)");
    }
    auto it = base.find(key);
    if (it == base.end()) throw ConfigError("unknown configuration key '" + path + "'");
    if (it->is_object()) {
      merge_into(*it, value, path);
    } else {
      bool same = (it->is_number() && value.is_number()) || (it->is_string() && value.is_string()) ||
                  (it->is_boolean() && value.is_boolean());
      if (!same) throw ConfigError("configuration key '" + path + "' has the wrong type");
      *it = value;
    }
  }
}

}  // namespace

void apply_override(Json& config, const std::string& dotted_key, const std::string& value) {
  Json* node = &config;
  std::string rest = dotted_key;
  for (;;) {
    auto dot = rest.find('.');
    auto part = rest.substr(0, dot);
    if (!node->is_object() || !node->contains(part)) throw ConfigError("unknown configuration key '" + dotted_key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    rest = rest.substr(dot + 1);
  }
  if (node->is_object()) throw ConfigError("'" + dotted_key + "' is a section, not a value");
  if (node->is_string()) {
    *node = value;
    return;
  }
  Json parsed;
  try {
    parsed = Json::parse(value);
  } catch (const Json::parse_error&) {
    throw ConfigError("value '" + value + "' for '" + dotted_key + "' is not valid");
  }
  if ((node->is_number() && !parsed.is_number()) || (node->is_boolean() && !parsed.is_boolean())) {
    throw ConfigError("value '" + value + "' for '" + dotted_key + "' has the wrong type");
  }
  *node = parsed;
}

Json load_config(const std::filesystem::path* file,
                 const std::vector<std::pair<std::string, std::string>>& overrides) {
  Json config = default_config();
  if (file) {
    Json doc;
    try {
      doc = read_json_file(*file);
    } catch (const std::exception& e) {
      throw ConfigError("cannot read configuration " + file->string() + ": " + e.what());
    }
    merge_into(config, doc, "");
  }
  for (const auto& [k, v] : overrides) apply_override(config, k, v);
  settings_from_config(config);
  return config;
}

Settings settings_from_config(const Json& c) {
  Settings s;
  auto ms = [](const Json& v) { return std::chrono::milliseconds(static_cast<long long>(v.get<double>() * 1000)); };
  s.stimulus_samples = c.at("stimulus_samples").get<int>();
  s.emulator_samples = c.at("emulator_samples").get<int>();
  s.improve_iterations = c.at("improve_iterations").get<int>();
  s.temperature = c.at("temperature").get<double>();
  s.validation_budget = c.at("validation_budget").get<int>();
  s.max_tokens = c.at("max_tokens").get<int>();
  s.candidate_workers = c.at("workers").at("candidates").get<int>();
  s.problem_workers = c.at("workers").at("problems").get<int>();
  const auto& t = c.at("timeouts");
  s.stimulus_timeout = ms(t.at("stimulus_s"));
  s.candidate_timeout = ms(t.at("candidate_s"));
  s.build_timeout = ms(t.at("build_s"));
  s.sim_timeout = ms(t.at("sim_s"));
  const auto& l = c.at("limits");
  auto count = [](const Json& v, const char* name) {
    if (v.get<long long>() < 1) throw ConfigError(std::string(name) + " must be at least 1");
    return v.get<std::size_t>();
  };
  s.max_scenarios = count(l.at("max_scenarios"), "limits.max_scenarios");
  s.max_total_steps = count(l.at("max_total_steps"), "limits.max_total_steps");
  s.max_failures_reported = l.at("max_failures_reported").get<int>();
  s.verilator = c.at("simulator").at("verilator").get<std::string>();
  validate_settings(s);
  return s;
}

std::shared_ptr<Provider> make_provider(const Json& config) {
  const auto& p = config.at("provider");
  auto kind = p.at("kind").get<std::string>();
  if (kind == "fixture") {
    auto dir = p.at("fixture_dir").get<std::string>();
    if (dir.empty()) throw ConfigError("provider.fixture_dir is required for the fixture provider");
    return std::make_shared<FixtureProvider>(dir);
  }
  if (kind == "remote") {
    RemoteConfig rc;
    rc.endpoint = p.at("endpoint").get<std::string>();
    rc.model = p.at("model").get<std::string>();
    rc.api_key_env = p.at("api_key_env").get<std::string>();
    rc.timeout_s = p.at("timeout_s").get<double>();
    rc.retries = p.at("retries").get<int>();
    return std::make_shared<RemoteProvider>(rc);
  }
  throw ConfigError("provider.kind must be 'fixture' or 'remote', not '" + kind + "'");
}

std::unique_ptr<ScriptBackend> make_backend(const Json& config) {
  const auto& r = config.at("runtime");
  auto kind = r.at("kind").get<std::string>();
  if (kind == "python") {
    return std::make_unique<PythonTailBackend>(r.at("interpreter").get<std::string>(),
                                               r.at("tail_dir").get<std::string>());
  }
  if (kind == "fixture") {
    auto dir = r.at("fixture_dir").get<std::string>();
    if (dir.empty()) throw ConfigError("runtime.fixture_dir is required for the fixture runtime");
    return std::make_unique<FixtureBackend>(dir);
  }
  throw ConfigError("runtime.kind must be 'python' or 'fixture', not '" + kind + "'");
}

std::filesystem::path workspace_root(const Json& config) {
  return config.at("workspace").get<std::string>();
}

}  // namespace tbgen
