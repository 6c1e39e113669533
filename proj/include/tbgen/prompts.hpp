#pragma once

#include <string>
#include <string_view>

#include "tbgen/context.hpp"
#include "tbgen/llm.hpp"

namespace tbgen::prompts {

// System prompts double as agent identifiers in tests and call logs.
extern const std::string_view kScenarioDesignSystem;
extern const std::string_view kStimulusSystem;
extern const std::string_view kEmulatorSystem;
extern const std::string_view kJudgeSystem;
extern const std::string_view kRefineSystem;
extern const std::string_view kRootCauseSystem;

/// Reminder about MSB-first strings and Verilog range indexing.
std::string width_semantics_note(const ModuleInterface& iface);

PromptBundle scenario_design(const Problem& problem);
PromptBundle stimulus_script(const Problem& problem, std::string_view plan);
PromptBundle emulator(const Problem& problem);
PromptBundle judge_select(std::string_view judge_inputs);
PromptBundle refine(std::string_view judge_inputs, std::string_view analysis,
                    std::string_view selected_source);
PromptBundle root_cause(const Problem& problem, std::string_view dut_source,
                        std::string_view model_source, std::string_view report);

/// Same prompt with a correction appended to the user message.
PromptBundle with_reask(PromptBundle prompt, std::string_view problem_with_reply);

}  // namespace tbgen::prompts
