#include "tbgen/stimulus.hpp"

#include <cctype>
#include <optional>
#include <set>
#include <variant>

#include "tbgen/errors.hpp"
#include "tbgen/log.hpp"
#include "tbgen/parallel.hpp"
#include "tbgen/prompts.hpp"

namespace tbgen {

ScenarioPlan design_scenarios(const Problem& problem, AgentContext& ctx) {
  validate_problem(problem);
  SamplingParams params{ctx.settings.temperature, 1, ctx.settings.max_tokens};
  auto completions = ctx.gateway.complete(prompts::scenario_design(problem), params, Stage::stimulus);
  ScenarioPlan plan{completions.front().text};
  if (plan.text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw StimulusGenError("scenario design returned an empty plan");
  }
  if (!ctx.workdir.empty()) write_text_file(ctx.workdir / "Testcase_Desc.txt", plan.text);
  return plan;
}

std::vector<StimulusScript> generate_stimulus_scripts(const Problem& problem,
                                                      const ScenarioPlan& plan, int k,
                                                      AgentContext& ctx) {
  if (k < 1) throw ConfigError("stimulus sample count must be at least 1");
  SamplingParams params{ctx.settings.temperature, k, ctx.settings.max_tokens};
  auto completions =
      ctx.gateway.complete(prompts::stimulus_script(problem, plan.text), params, Stage::stimulus);
  std::vector<StimulusScript> scripts;
  for (int i = 0; i < k; ++i) {
    try {
      scripts.push_back({extract_code_block(completions[i].text, "python"), i});
    } catch (const ExtractionError& e) {
      log::get("stimulus")->warn("sample {} dropped: {}", i, e.what());
      log::get("stimulus")->debug("sample {} text:\n{}", i, e.text());
    }
  }
  if (scripts.empty()) throw StimulusGenError("all " + std::to_string(k) + " stimulus samples were unusable");
  return scripts;
}

namespace {

std::string sanitize_id(const std::string& raw) {
  std::string out;
  for (char c : raw) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'
                      ? c
                      : '_');
  }
  return out;
}

std::string steps_key(const std::vector<StimulusStep>& steps) {
  std::string key;
  for (const auto& st : steps) {
    for (const auto& [name, v] : st.assignments) key += name + "=" + format_bitvector(v) + ",";
    key += ";";
  }
  return key;
}

// Returns the parsed scenario or an explanation of why it was rejected.
std::variant<Scenario, std::string> parse_scenario(const Json& elem, const ModuleInterface& iface,
                                                   std::vector<std::string>& notes,
                                                   const std::string& where) {
  if (!elem.is_object()) return where + ": not an object";
  auto steps_it = elem.find("steps");
  if (steps_it == elem.end() || !steps_it->is_array()) return where + ": missing 'steps' array";
  if (steps_it->empty()) return where + ": no steps";
  std::string local;
  if (auto id = elem.find("scenario"); id != elem.end()) {
    local = id->is_string() ? id->get<std::string>() : id->dump();
  }

  auto inputs = iface.data_inputs();
  SignalMap held;
  for (const PortDecl* p : inputs) held.emplace(p->name, BitVector::zero(p->width));

  Scenario sc{local, {}};
  bool clock_noted = false;
  for (std::size_t k = 0; k < steps_it->size(); ++k) {
    const Json& step = (*steps_it)[k];
    if (!step.is_object()) return where + " step " + std::to_string(k) + ": not an object";
    for (const auto& [name, value] : step.items()) {
      const PortDecl* port = iface.find(name);
      if (port && port->is_clock) {
        if (!clock_noted) notes.push_back(where + ": clock key '" + name + "' ignored");
        clock_noted = true;
        continue;
      }
      if (!port || port->direction != Direction::input) {
        return where + " step " + std::to_string(k) + ": '" + name + "' is not an input port";
      }
      if (!value.is_string()) {
        return where + " step " + std::to_string(k) + ": value of '" + name + "' is not a string";
      }
      try {
        held.insert_or_assign(name, parse_bitvector(value.get<std::string>(), port->width));
      } catch (const Error& e) {
        return where + " step " + std::to_string(k) + ": port '" + name + "': " + e.what();
      }
    }
    sc.steps.push_back({held});
  }
  return sc;
}

}  // namespace

MergeResult merge_stimulus_outputs(const ModuleInterface& iface,
                                   const std::vector<ScriptOutput>& outputs,
                                   std::size_t max_scenarios, std::size_t max_total_steps) {
  MergeResult result{{iface, {}}, {}};
  std::set<std::string> seen_steps;
  std::set<std::string> used_ids;
  std::size_t total_steps = 0;
  bool truncated = false;

  for (const auto& out : outputs) {
    if (!out.document.is_array()) {
      result.notes.push_back("sample " + std::to_string(out.sample_index) +
                             ": output is not a scenario list");
      continue;
    }
    for (std::size_t i = 0; i < out.document.size() && !truncated; ++i) {
      std::string where = "sample " + std::to_string(out.sample_index) + " scenario #" + std::to_string(i);
      auto parsed = parse_scenario(out.document[i], iface, result.notes, where);
      if (auto* why = std::get_if<std::string>(&parsed)) {
        result.notes.push_back("dropped " + *why);
        continue;
      }
      Scenario sc = std::get<Scenario>(std::move(parsed));
      auto key = steps_key(sc.steps);
      if (!seen_steps.insert(key).second) continue;

      std::string local = sanitize_id(sc.id);
      if (local.empty()) local = "scn" + std::to_string(i);
      std::string id = "s" + std::to_string(out.sample_index) + "_" + local;
      for (int n = 2; used_ids.count(id); ++n) {
        id = "s" + std::to_string(out.sample_index) + "_" + local + "_" + std::to_string(n);
      }
      sc.id = id;

      if (result.suite.scenarios.size() >= max_scenarios) {
        truncated = true;
        break;
      }
      if (total_steps + sc.steps.size() > max_total_steps) {
        sc.steps.resize(max_total_steps - total_steps);
        truncated = true;
        if (sc.steps.empty()) break;
      }
      used_ids.insert(sc.id);
      total_steps += sc.steps.size();
      result.suite.scenarios.push_back(std::move(sc));
    }
  }
  if (truncated) {
    result.notes.push_back("suite truncated at " + std::to_string(result.suite.scenarios.size()) +
                           " scenarios / " + std::to_string(total_steps) + " steps");
  }
  return result;
}

StimulusSuite collect_stimuli(const std::vector<StimulusScript>& scripts,
                              const ModuleInterface& iface, AgentContext& ctx) {
  if (scripts.empty()) throw StimulusGenError("no stimulus scripts to run");
  auto logger = log::get("stimulus");
  std::vector<std::optional<ScriptOutput>> slots(scripts.size());
  parallel_for(scripts.size(), ctx.settings.candidate_workers, [&](std::size_t i) {
    const auto& script = scripts[i];
    if (!ctx.workdir.empty()) {
      write_text_file(ctx.workdir / "stimulus" /
                          ("Stimuli_Gen_" + std::to_string(script.sample_index) + ".py"),
                      script.source);
    }
    auto run = ctx.backend.run_stimulus(script.source, ctx.settings.stimulus_timeout);
    if (!run.ok()) {
      logger->warn("stimulus script {} discarded: {}", script.sample_index, run.describe());
      return;
    }
    try {
      slots[i] = ScriptOutput{script.sample_index, Json::parse(run.output)};
    } catch (const Json::parse_error& e) {
      logger->warn("stimulus script {} produced invalid JSON: {}", script.sample_index, e.what());
    }
  });

  std::vector<ScriptOutput> outputs;
  for (auto& s : slots) {
    if (s) outputs.push_back(std::move(*s));
  }
  auto merged = merge_stimulus_outputs(iface, outputs, ctx.settings.max_scenarios,
                                       ctx.settings.max_total_steps);
  for (const auto& note : merged.notes) logger->warn("{}", note);
  if (merged.suite.scenarios.empty()) {
    throw StimulusGenError("no valid scenarios from " + std::to_string(scripts.size()) +
                           " stimulus scripts");
  }
  validate_suite(merged.suite);
  if (!ctx.workdir.empty()) {
    write_text_file(ctx.workdir / "Input_signal.json", dump_wire(stimulus_to_json(merged.suite)));
  }
  logger->info("{} scenarios, {} steps", merged.suite.scenarios.size(), merged.suite.total_steps());
  return merged.suite;
}

}  // namespace tbgen
