#include "tbgen/prompts.hpp"

#include <sstream>

namespace tbgen::prompts {

const std::string_view kScenarioDesignSystem =
    "You are a hardware verification engineer. You read a natural-language RTL "
    "specification and write a test plan: a numbered list of independent test "
    "scenarios. For each scenario give a short identifier, the behaviour it targets, "
    "and the kind of input sequence that exercises it. Cover normal operation, edge "
    "cases (all zeros, all ones, overflow, wrap-around), reset behaviour for clocked "
    "designs, and signal conditions that toggle every output bit. Reply with the plan "
    "only.";

const std::string_view kStimulusSystem =
    "You write Python stimulus generators for RTL testbenches. The program must define "
    "a function generate_scenarios() that returns a list of dictionaries, each of the "
    "form {\"scenario\": <identifier string>, \"steps\": [<step>, ...]}. Every step is a "
    "dictionary mapping each non-clock input port name to a binary string whose length "
    "is exactly the port width, most significant bit first. One step is one evaluated "
    "cycle; never drive the clock. Use loops and the random module for breadth. Reply "
    "with a single ```python fenced block.";

const std::string_view kEmulatorSystem =
    "You write Python functional models of RTL modules. The program must define a class "
    "Python_DUT with an __init__(self) that sets every internal state variable to its "
    "power-on value, and a method load(self, inputs) that receives one step of inputs "
    "(a dict of port name to binary string, MSB first) and returns a dict with every "
    "output port mapped to a binary string of exact width. For clocked designs one "
    "load call is one rising clock edge: update state from the inputs, then return the "
    "registered outputs. Reason about the specification first, then reply with a single "
    "```python fenced block.";

const std::string_view kJudgeSystem =
    "You judge candidate Python functional models of an RTL module. You receive the "
    "specification, the candidate sources, and the reference waveforms they produced. "
    "Pick the candidate whose behaviour best matches the specification and decide "
    "whether its waveforms are fully aligned with it. Reply with one ```json fenced "
    "block of the form {\"best\": <candidate index>, \"aligned\": <true|false>, "
    "\"analysis\": <misalignment report, empty when aligned>}.";

const std::string_view kRefineSystem =
    "You repair Python functional models of RTL modules. You receive the judge's inputs, "
    "the selected candidate, and a misalignment report. Produce a corrected model that "
    "keeps the Python_DUT class contract (__init__ and load). Reply with a single "
    "```python fenced block.";

const std::string_view kRootCauseSystem =
    "You are a verification engineer reviewing a failed simulation. You receive the "
    "specification, the RTL design under test, the Python functional model that produced "
    "the expected values, and a report of the mismatching signals. Decide whether the "
    "failure is caused by the design (DUT) or by the functional model (MODEL). Pay "
    "attention to bit ordering and range declarations. Reply with one ```json fenced "
    "block of the form {\"cause\": \"DUT\" | \"MODEL\", \"rationale\": <explanation>}.";

std::string width_semantics_note(const ModuleInterface& iface) {
  std::ostringstream os;
  os << "Signal values are binary strings written most significant bit first. In Verilog, "
        "a port declared [3:0] holding \"1000\" has bit 3 set and bit 0 clear. Python indexes "
        "strings from the left, so s[0] is the most significant bit, not bit 0. Convert with "
        "int(s, 2) and back with format(v, '0{w}b') to avoid reversing bits.";
  for (const auto& p : iface.ports) {
    if (p.lsb != 0) {
      os << " Port " << p.name << " is declared [" << p.msb() << ":" << p.lsb
         << "]: the leftmost character is " << p.name << "[" << p.msb()
         << "] and the rightmost is " << p.name << "[" << p.lsb << "].";
    }
  }
  return os.str();
}

namespace {

std::string problem_header(const Problem& problem) {
  std::ostringstream os;
  os << "## Specification\n" << problem.spec_text << "\n\n";
  os << "## Module interface (" << problem.interface.module_name << ", "
     << circuit_type_name(problem.circuit_type) << ")\n"
     << render_port_table(problem.interface) << "\n";
  return os.str();
}

const std::pair<std::string, std::string> kStimulusShot = {
    R"(## Specification
Build a 4-bit up counter with synchronous active-high reset. q increments on every rising clock edge and wraps from 15 to 0.

## Module interface (counter4, SEQ)
| port | direction | width | range | role |
|---|---|---|---|---|
| clk | input | 1 | [0:0] | clock |
| reset | input | 1 | [0:0] | reset |
| q | output | 4 | [3:0] | data |

## Test plan
1. reset_then_count: assert reset, then count for 20 cycles to cross the wrap-around.
2. mid_reset: reset in the middle of counting.)",
    R"(```python
import random

def generate_scenarios():
    scenarios = []
    steps = [{"reset": "1"}] + [{"reset": "0"} for _ in range(20)]
    scenarios.append({"scenario": "reset_then_count", "steps": steps})
    steps = [{"reset": "1"}] + [{"reset": "0"}] * 5 + [{"reset": "1"}] + [{"reset": "0"}] * 3
    scenarios.append({"scenario": "mid_reset", "steps": steps})
    for n in range(3):
        steps = [{"reset": "1"}]
        steps += [{"reset": "1" if random.random() < 0.1 else "0"} for _ in range(16)]
        scenarios.append({"scenario": f"random_{n}", "steps": steps})
    return scenarios
```)"};

const std::pair<std::string, std::string> kEmulatorShot = {
    R"(## Specification
Build a 4-bit up counter with synchronous active-high reset. q increments on every rising clock edge and wraps from 15 to 0.

## Module interface (counter4, SEQ)
| port | direction | width | range | role |
|---|---|---|---|---|
| clk | input | 1 | [0:0] | clock |
| reset | input | 1 | [0:0] | reset |
| q | output | 4 | [3:0] | data |)",
    R"(The register q updates on the rising edge: reset forces 0, otherwise q + 1 modulo 16.

```python
class Python_DUT:
    def __init__(self):
        self.q = 0

    def load(self, inputs):
        if int(inputs["reset"], 2):
            self.q = 0
        else:
            self.q = (self.q + 1) % 16
        return {"q": format(self.q, "04b")}
```)"};

}  // namespace

PromptBundle scenario_design(const Problem& problem) {
  PromptBundle p;
  p.system = std::string(kScenarioDesignSystem);
  p.user = problem_header(problem) + "Write the test plan.";
  return p;
}

PromptBundle stimulus_script(const Problem& problem, std::string_view plan) {
  PromptBundle p;
  p.system = std::string(kStimulusSystem);
  p.few_shots.push_back(kStimulusShot);
  p.user = problem_header(problem) + "## Test plan\n" + std::string(plan) + "\n\n" +
           width_semantics_note(problem.interface) +
           "\n\nWrite Stimuli_Gen.py implementing generate_scenarios() for this plan.";
  return p;
}

PromptBundle emulator(const Problem& problem) {
  PromptBundle p;
  p.system = std::string(kEmulatorSystem);
  p.few_shots.push_back(kEmulatorShot);
  p.user = problem_header(problem) + width_semantics_note(problem.interface) +
           "\n\nWrite the Python_DUT functional model.";
  return p;
}

PromptBundle judge_select(std::string_view judge_inputs) {
  PromptBundle p;
  p.system = std::string(kJudgeSystem);
  p.user = std::string(judge_inputs) +
           "\nSelect the best candidate and report whether it is aligned with the "
           "specification.";
  return p;
}

PromptBundle refine(std::string_view judge_inputs, std::string_view analysis,
                    std::string_view selected_source) {
  PromptBundle p;
  p.system = std::string(kRefineSystem);
  p.user = std::string(judge_inputs) + "\n## Selected candidate\n```python\n" +
           std::string(selected_source) + "\n```\n\n## Misalignment report\n" +
           std::string(analysis) + "\n\nWrite the corrected Python_DUT model.";
  return p;
}

PromptBundle root_cause(const Problem& problem, std::string_view dut_source,
                        std::string_view model_source, std::string_view report) {
  PromptBundle p;
  p.system = std::string(kRootCauseSystem);
  p.user = problem_header(problem) + "## Design under test\n```verilog\n" +
           std::string(dut_source) + "\n```\n\n## Functional model\n```python\n" +
           std::string(model_source) + "\n```\n\n## Simulation report\n" + std::string(report) +
           "\n\nIs the failure caused by the DUT or by the MODEL?";
  return p;
}

PromptBundle with_reask(PromptBundle prompt, std::string_view problem_with_reply) {
  prompt.user += "\n\nYour previous reply could not be used: " + std::string(problem_with_reply) +
                 ". Reply again with exactly one ```json fenced block in the required form.";
  return prompt;
}

}  // namespace tbgen::prompts
