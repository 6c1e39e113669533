#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tbgen/context.hpp"
#include "tbgen/llm.hpp"
#include "tbgen/validate.hpp"
#include "tbgen/wire.hpp"

namespace tbgen {

enum class GoldenVerdict { CORRECT, INCORRECT };

struct MutantCase {
  std::string id;
  std::string source;
  GoldenVerdict golden_verdict = GoldenVerdict::INCORRECT;
};

struct ProblemRecord {
  Problem problem;
  std::string golden_dut;
  std::vector<MutantCase> mutants;
};

/// An exact rate. den == 0 reads as 0.
struct Fraction {
  std::size_t num = 0;
  std::size_t den = 0;
  double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

/// Share of problems whose golden DUT passed. EvalInputError when a problem
/// has no verdict.
Fraction eval1(const std::vector<std::string>& problem_ids,
               const std::map<std::string, DutStatus>& golden_verdicts);

using VerdictMatrix = std::map<std::pair<std::string, std::string>, DutStatus>;

struct Eval2Result {
  Fraction rate;
  std::vector<std::string> excluded;  // problems without mutants
};

/// Share of problems on which PASS agrees with CORRECT for at least alpha
/// percent of the mutants. EvalInputError on a missing matrix entry or an
/// alpha outside [0, 100].
Eval2Result eval2(const std::vector<ProblemRecord>& problems, const VerdictMatrix& matrix, int alpha);

struct Corpus {
  std::vector<ProblemRecord> problems;
  std::size_t correct_mutants = 0;
  std::size_t incorrect_mutants = 0;
};

/// Reads <root>/<problem_id>/{spec.txt, top.v, meta.json, mutants/<mid>.v,
/// mutants/<mid>.verdict} for every problem directory, sorted by id.
/// Throws EvalInputError on an empty or malformed corpus.
Corpus load_corpus(const std::filesystem::path& root);

/// Outcome of one problem in a benchmark sweep.
struct ProblemRow {
  std::string id;
  CircuitType circuit_type = CircuitType::CMB;
  DutStatus golden = DutStatus::FAIL;  // after the judge loop
  bool golden_first_run_passed = false;
  int rounds_used = 0;
  std::map<std::string, DutStatus> mutant_verdicts;
  std::size_t mutants = 0;
  std::size_t agreements = 0;
  std::optional<std::string> error;  // kind: message when the pipeline failed
  std::map<std::string, StageUsage> tokens;  // by stage name
};

Json row_to_json(const ProblemRow& row);
ProblemRow row_from_json(const Json& doc);

struct TypeRates {
  std::size_t problems = 0;
  Fraction eval1;  // post-judge
  Fraction eval1_pre_judge;
  std::map<int, Fraction> eval2;
};

struct EvalReport {
  std::vector<int> alphas;  // descending
  std::map<std::string, TypeRates> per_type;  // CMB, SEQ, TOTAL
  std::vector<ProblemRow> rows;
  std::vector<std::string> excluded;
  std::size_t correct_mutants = 0;
  std::size_t incorrect_mutants = 0;
};

/// Aggregates rows. A failed problem counts against every rate it
/// participates in; problems without mutants are left out of Eval2.
EvalReport build_report(const Corpus& corpus, std::vector<ProblemRow> rows, std::vector<int> alphas);

Json report_to_json(const EvalReport& report);
std::string format_report_table(const EvalReport& report);

struct BenchmarkOptions {
  std::vector<int> alphas{80, 100};
  bool resume = false;
  std::filesystem::path workspace;
};

struct BenchmarkDeps {
  std::shared_ptr<Provider> provider;
  ScriptBackend& backend;
  Simulator& simulator;
  const Settings& settings;
};

/// Full pipeline on each golden DUT, then the finalized testbench against
/// every mutant (simulation only). Per-problem state lives in
/// <workspace>/<id>/eval_state.json; completed problems are reused with
/// `resume`. Writes eval_report.json and eval_report.txt to the workspace.
EvalReport run_benchmark(const Corpus& corpus, const BenchmarkOptions& options, BenchmarkDeps deps,
                         TokenLedger* ledger = nullptr);

/// Labels each mutant by simulating it against the corpus testbench
/// (<problem>/golden_tb.cpp, or one emitted from <problem>/golden_reference.json)
/// and writes mutants/<mid>.verdict. Returns the number of labels written.
int derive_verdicts(const std::filesystem::path& root, Simulator& simulator,
                    const std::filesystem::path& scratch);

}  // namespace tbgen
