#include "tbgen/wire.hpp"

#include <fstream>
#include <sstream>

#include "tbgen/errors.hpp"

namespace tbgen {

namespace {

const Json& member(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw FormatError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(where + ": missing key '" + key + "'");
  return *it;
}

SignalMap read_values(const Json& obj, const ModuleInterface& iface, const std::string& where) {
  if (!obj.is_object()) throw FormatError(where + ": expected an object of port values");
  SignalMap out;
  for (const auto& [name, value] : obj.items()) {
    const PortDecl* port = iface.find(name);
    if (!port) throw ValidationError(where + ": unknown port '" + name + "'");
    if (!value.is_string()) throw FormatError(where + ": value of '" + name + "' is not a string");
    out.emplace(name, parse_bitvector(value.get<std::string>(), port->width));
  }
  return out;
}

std::string step_where(const std::string& scenario, std::size_t k) {
  return "scenario '" + scenario + "' step " + std::to_string(k);
}

}  // namespace

Json signal_map_to_json(const SignalMap& values) {
  Json obj = Json::object();
  for (const auto& [name, v] : values) obj[name] = format_bitvector(v);
  return obj;
}

Json stimulus_to_json(const StimulusSuite& suite) {
  Json doc = Json::array();
  for (const auto& sc : suite.scenarios) {
    Json steps = Json::array();
    for (const auto& st : sc.steps) steps.push_back(signal_map_to_json(st.assignments));
    doc.push_back({{"scenario", sc.id}, {"steps", std::move(steps)}});
  }
  return doc;
}

StimulusSuite stimulus_from_json(const Json& doc, const ModuleInterface& iface) {
  if (!doc.is_array()) throw FormatError("stimulus document must be a top-level array");
  StimulusSuite suite{iface, {}};
  for (std::size_t i = 0; i < doc.size(); ++i) {
    std::string where = "scenario #" + std::to_string(i);
    const Json& id = member(doc[i], "scenario", where);
    if (!id.is_string()) throw FormatError(where + ": 'scenario' must be a string");
    const Json& steps = member(doc[i], "steps", where);
    if (!steps.is_array()) throw FormatError(where + ": 'steps' must be an array");
    Scenario sc{id.get<std::string>(), {}};
    for (std::size_t k = 0; k < steps.size(); ++k) {
      sc.steps.push_back({read_values(steps[k], iface, step_where(sc.id, k))});
    }
    suite.scenarios.push_back(std::move(sc));
  }
  validate_suite(suite);
  return suite;
}

Json traces_to_json(const TraceSet& traces) {
  Json doc = Json::array();
  for (const auto& tr : traces.traces) {
    Json steps = Json::array();
    for (const auto& st : tr.steps) {
      steps.push_back(
          {{"inputs", signal_map_to_json(st.inputs)}, {"outputs", signal_map_to_json(st.outputs)}});
    }
    doc.push_back({{"scenario", tr.scenario_id}, {"steps", std::move(steps)}});
  }
  return doc;
}

TraceSet traces_from_json(const Json& doc, const ModuleInterface& iface) {
  if (!doc.is_array()) throw FormatError("trace document must be a top-level array");
  TraceSet out{iface, {}};
  for (std::size_t i = 0; i < doc.size(); ++i) {
    std::string where = "trace #" + std::to_string(i);
    const Json& id = member(doc[i], "scenario", where);
    if (!id.is_string()) throw FormatError(where + ": 'scenario' must be a string");
    const Json& steps = member(doc[i], "steps", where);
    if (!steps.is_array()) throw FormatError(where + ": 'steps' must be an array");
    Trace tr{id.get<std::string>(), {}};
    for (std::size_t k = 0; k < steps.size(); ++k) {
      auto w = step_where(tr.scenario_id, k);
      tr.steps.push_back({read_values(member(steps[k], "inputs", w), iface, w),
                          read_values(member(steps[k], "outputs", w), iface, w)});
    }
    out.traces.push_back(std::move(tr));
  }
  validate_traceset(out);
  return out;
}

std::string dump_wire(const Json& doc) { return doc.dump(2) + "\n"; }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json read_json_file(const std::filesystem::path& path) {
  auto text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace tbgen
