#include "tbgen/eval.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <mutex>
#include <set>

#include "tbgen/codegen.hpp"
#include "tbgen/errors.hpp"
#include "tbgen/log.hpp"
#include "tbgen/parallel.hpp"
#include "tbgen/pipeline.hpp"

namespace tbgen {

namespace fs = std::filesystem;

Fraction eval1(const std::vector<std::string>& problem_ids,
               const std::map<std::string, DutStatus>& golden_verdicts) {
  Fraction f{0, problem_ids.size()};
  for (const auto& id : problem_ids) {
    auto it = golden_verdicts.find(id);
    if (it == golden_verdicts.end()) throw EvalInputError("no golden verdict for problem " + id);
    if (it->second == DutStatus::PASS) ++f.num;
  }
  return f;
}

namespace {

bool meets(std::size_t agreements, std::size_t mutants, int alpha) {
  return agreements * 100 >= static_cast<std::size_t>(alpha) * mutants;
}

void check_alpha(int alpha) {
  if (alpha < 0 || alpha > 100) throw EvalInputError(fmt::format("alpha {} is outside 0..100", alpha));
}

}  // namespace

Eval2Result eval2(const std::vector<ProblemRecord>& problems, const VerdictMatrix& matrix, int alpha) {
  check_alpha(alpha);
  Eval2Result r;
  for (const auto& rec : problems) {
    if (rec.mutants.empty()) {
      r.excluded.push_back(rec.problem.id);
      continue;
    }
    std::size_t agree = 0;
    for (const auto& m : rec.mutants) {
      auto it = matrix.find({rec.problem.id, m.id});
      if (it == matrix.end()) throw EvalInputError("no verdict for mutant " + rec.problem.id + "/" + m.id);
      bool pass = it->second == DutStatus::PASS;
      if (pass == (m.golden_verdict == GoldenVerdict::CORRECT)) ++agree;
    }
    ++r.rate.den;
    if (meets(agree, rec.mutants.size(), alpha)) ++r.rate.num;
  }
  return r;
}

namespace {

std::string trim_text(std::string s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<fs::path> sorted_entries(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Corpus load_corpus(const fs::path& root) {
  if (!fs::is_directory(root)) throw EvalInputError("corpus " + root.string() + " is not a directory");
  Corpus corpus;
  for (const auto& dir : sorted_entries(root)) {
    if (!fs::is_directory(dir)) continue;
    auto id = dir.filename().string();
    if (!fs::exists(dir / "top.v")) throw EvalInputError("problem " + id + " has no top.v");
    if (!fs::exists(dir / "meta.json")) throw EvalInputError("problem " + id + " has no meta.json");
    ProblemRecord rec;
    try {
      rec.problem = load_problem_dir(dir);
    } catch (const Error& e) {
      throw EvalInputError("problem " + id + ": " + e.what());
    }
    auto meta = read_json_file(dir / "meta.json");
    auto type = meta.value("circuit_type", std::string{});
    if (type != "CMB" && type != "SEQ") throw EvalInputError("problem " + id + ": meta.json circuit_type must be CMB or SEQ");
    if (type != circuit_type_name(rec.problem.circuit_type)) {
      throw EvalInputError("problem " + id + ": meta.json says " + type + " but the interface says " +
                           std::string(circuit_type_name(rec.problem.circuit_type)));
    }
    rec.golden_dut = read_text_file(dir / "top.v");
    if (fs::is_directory(dir / "mutants")) {
      for (const auto& f : sorted_entries(dir / "mutants")) {
        if (f.extension() != ".v") continue;
        MutantCase m;
        m.id = f.stem().string();
        m.source = read_text_file(f);
        auto vfile = fs::path(f).replace_extension(".verdict");
        if (!fs::exists(vfile)) throw EvalInputError("mutant " + id + "/" + m.id + " has no verdict file");
        auto v = trim_text(read_text_file(vfile));
        if (v == "CORRECT") {
          m.golden_verdict = GoldenVerdict::CORRECT;
          ++corpus.correct_mutants;
        } else if (v == "INCORRECT") {
          m.golden_verdict = GoldenVerdict::INCORRECT;
          ++corpus.incorrect_mutants;
        } else {
          throw EvalInputError("mutant " + id + "/" + m.id + ": verdict must be CORRECT or INCORRECT");
        }
        rec.mutants.push_back(std::move(m));
      }
    }
    corpus.problems.push_back(std::move(rec));
  }
  if (corpus.problems.empty()) throw EvalInputError("corpus " + root.string() + " contains no problems");
  return corpus;
}

Json row_to_json(const ProblemRow& row) {
  Json mv = Json::object();
  for (const auto& [k, v] : row.mutant_verdicts) mv[k] = v == DutStatus::PASS ? "PASS" : "FAIL";
  Json tokens = Json::object();
  for (const auto& [k, v] : row.tokens) tokens[k] = {{"prompt", v.prompt_tokens}, {"completion", v.completion_tokens}};
  Json j = {{"id", row.id},
            {"circuit_type", circuit_type_name(row.circuit_type)},
            {"golden", row.golden == DutStatus::PASS ? "PASS" : "FAIL"},
            {"golden_first_run_passed", row.golden_first_run_passed},
            {"rounds_used", row.rounds_used},
            {"mutant_verdicts", mv},
            {"mutants", row.mutants},
            {"agreements", row.agreements},
            {"tokens", tokens}};
  j["error"] = row.error ? Json(*row.error) : Json(nullptr);
  return j;
}

ProblemRow row_from_json(const Json& j) {
  ProblemRow row;
  row.id = j.at("id").get<std::string>();
  row.circuit_type = j.at("circuit_type") == "SEQ" ? CircuitType::SEQ : CircuitType::CMB;
  row.golden = j.at("golden") == "PASS" ? DutStatus::PASS : DutStatus::FAIL;
  row.golden_first_run_passed = j.at("golden_first_run_passed").get<bool>();
  row.rounds_used = j.at("rounds_used").get<int>();
  for (const auto& [k, v] : j.at("mutant_verdicts").items()) {
    row.mutant_verdicts[k] = v == "PASS" ? DutStatus::PASS : DutStatus::FAIL;
  }
  row.mutants = j.at("mutants").get<std::size_t>();
  row.agreements = j.at("agreements").get<std::size_t>();
  for (const auto& [k, v] : j.at("tokens").items()) {
    row.tokens[k] = {v.at("prompt").get<long long>(), v.at("completion").get<long long>()};
  }
  if (!j.at("error").is_null()) row.error = j.at("error").get<std::string>();
  return row;
}

EvalReport build_report(const Corpus& corpus, std::vector<ProblemRow> rows, std::vector<int> alphas) {
  for (int a : alphas) check_alpha(a);
  std::sort(alphas.begin(), alphas.end(), std::greater<>());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
  std::sort(rows.begin(), rows.end(), [](const ProblemRow& a, const ProblemRow& b) { return a.id < b.id; });

  EvalReport report;
  report.alphas = alphas;
  report.correct_mutants = corpus.correct_mutants;
  report.incorrect_mutants = corpus.incorrect_mutants;
  for (const char* t : {"CMB", "SEQ", "TOTAL"}) {
    auto& tr = report.per_type[t];
    for (int a : alphas) tr.eval2[a] = {};
  }

  for (const auto& row : rows) {
    for (const char* t : {circuit_type_name(row.circuit_type).data(), "TOTAL"}) {
      auto& tr = report.per_type[t];
      ++tr.problems;
      ++tr.eval1.den;
      ++tr.eval1_pre_judge.den;
      if (!row.error && row.golden == DutStatus::PASS) ++tr.eval1.num;
      if (!row.error && row.golden_first_run_passed) ++tr.eval1_pre_judge.num;
      if (row.mutants == 0) continue;
      for (int a : alphas) {
        auto& f = tr.eval2[a];
        ++f.den;
        if (!row.error && meets(row.agreements, row.mutants, a)) ++f.num;
      }
    }
    if (row.mutants == 0) report.excluded.push_back(row.id);
  }
  report.rows = std::move(rows);
  return report;
}

namespace {

Json fraction_json(const Fraction& f) {
  return {{"num", f.num}, {"den", f.den}, {"rate", f.value()}};
}

std::string fraction_cell(const Fraction& f) {
  if (f.den == 0) return "n/a";
  return fmt::format("{:.2f}% ({}/{})", 100.0 * f.value(), f.num, f.den);
}

}  // namespace

Json report_to_json(const EvalReport& report) {
  Json per_type = Json::object();
  for (const auto& [t, tr] : report.per_type) {
    Json e2 = Json::object();
    for (const auto& [a, f] : tr.eval2) e2[std::to_string(a)] = fraction_json(f);
    per_type[t] = {{"problems", tr.problems},
                   {"eval1", fraction_json(tr.eval1)},
                   {"eval1_post_judge", fraction_json(tr.eval1)},
                   {"eval1_pre_judge", fraction_json(tr.eval1_pre_judge)},
                   {"eval2", e2}};
  }
  Json rows = Json::array();
  for (const auto& r : report.rows) rows.push_back(row_to_json(r));
  return {{"alphas", report.alphas},
          {"per_type", per_type},
          {"excluded_from_eval2", report.excluded},
          {"mutant_balance", {{"correct", report.correct_mutants}, {"incorrect", report.incorrect_mutants}}},
          {"problems", rows}};
}

std::string format_report_table(const EvalReport& report) {
  std::string out = fmt::format("{:<20} {:>22} {:>22} {:>22}\n", "Criterion", "CMB", "SEQ", "TOTAL");
  auto line = [&](const std::string& name, auto get) {
    out += fmt::format("{:<20} {:>22} {:>22} {:>22}\n", name, fraction_cell(get(report.per_type.at("CMB"))),
                       fraction_cell(get(report.per_type.at("SEQ"))),
                       fraction_cell(get(report.per_type.at("TOTAL"))));
  };
  for (int a : report.alphas) {
    line(fmt::format("Eval2-{}%", a), [a](const TypeRates& t) { return t.eval2.at(a); });
  }
  line("Eval1", [](const TypeRates& t) { return t.eval1; });
  line("Eval1 (pre-judge)", [](const TypeRates& t) { return t.eval1_pre_judge; });
  out += fmt::format("Problems: {} CMB, {} SEQ. Mutants: {} correct, {} incorrect.\n",
                     report.per_type.at("CMB").problems, report.per_type.at("SEQ").problems,
                     report.correct_mutants, report.incorrect_mutants);
  if (!report.excluded.empty()) {
    out += "Excluded from Eval2 (no mutants):";
    for (const auto& id : report.excluded) out += " " + id;
    out += "\n";
  }
  return out;
}

namespace {

ProblemRow evaluate_problem(const ProblemRecord& rec, const fs::path& workdir, bool resume,
                            BenchmarkDeps& deps) {
  auto logger = log::get("eval");
  ProblemRow row;
  row.id = rec.problem.id;
  row.circuit_type = rec.problem.circuit_type;
  row.mutants = rec.mutants.size();

  Gateway gateway(deps.provider, workdir / "llm");
  try {
    AgentContext ctx{gateway, deps.backend, deps.settings, workdir};
    auto artifacts = run_gen_tb(rec.problem, ctx, resume);
    auto golden = with_dut(rec.problem, rec.golden_dut);
    auto vr = run_verify(golden, artifacts, ctx, deps.simulator);
    row.golden = vr.verdict.dut_status;
    row.golden_first_run_passed = vr.first_run_passed;
    row.rounds_used = vr.verdict.rounds_used;

    for (const auto& m : rec.mutants) {
      DutStatus status = DutStatus::FAIL;
      try {
        auto outcome = deps.simulator.build_and_run(
            {m.source, rec.problem.interface, vr.traces, vr.testbench, workdir / "mutants" / m.id});
        status = outcome.passed ? DutStatus::PASS : DutStatus::FAIL;
      } catch (const SimTimeoutError& e) {
        logger->warn("{}/{}: {}", rec.problem.id, m.id, e.what());
      } catch (const ProtocolError& e) {
        logger->warn("{}/{}: {}", rec.problem.id, m.id, e.what());
      }
      row.mutant_verdicts[m.id] = status;
      if ((status == DutStatus::PASS) == (m.golden_verdict == GoldenVerdict::CORRECT)) ++row.agreements;
    }
  } catch (const Error& e) {
    logger->error("{}: {}: {}", rec.problem.id, e.kind(), e.what());
    row.error = e.kind() + ": " + e.what();
  } catch (const std::exception& e) {
    logger->error("{}: {}", rec.problem.id, e.what());
    row.error = std::string("InternalError: ") + e.what();
  }
  if (row.error) {
    row.golden = DutStatus::FAIL;
    row.golden_first_run_passed = false;
    row.mutant_verdicts.clear();
    row.agreements = 0;
  }
  auto usage = ledger_from_log(workdir / "llm");
  for (Stage s : kAllStages) {
    auto u = usage.usage(s);
    row.tokens[std::string(stage_name(s))] = u;
  }
  return row;
}

}  // namespace

EvalReport run_benchmark(const Corpus& corpus, const BenchmarkOptions& options, BenchmarkDeps deps,
                         TokenLedger* ledger) {
  if (corpus.problems.empty()) throw EvalInputError("corpus contains no problems");
  if (options.workspace.empty()) throw ConfigError("benchmark needs a workspace");
  auto logger = log::get("eval");
  std::vector<ProblemRow> rows(corpus.problems.size());
  parallel_for(corpus.problems.size(), deps.settings.problem_workers, [&](std::size_t i) {
    const auto& rec = corpus.problems[i];
    auto workdir = options.workspace / rec.problem.id;
    auto state_file = workdir / "eval_state.json";
    if (options.resume && fs::exists(state_file)) {
      try {
        auto doc = read_json_file(state_file);
        if (doc.value("complete", false)) {
          rows[i] = row_from_json(doc.at("row"));
          logger->info("{}: reused from a previous sweep", rec.problem.id);
          return;
        }
      } catch (const std::exception& e) {
        logger->warn("{}: ignoring unreadable eval state: {}", rec.problem.id, e.what());
      }
    }
    if (!options.resume) fs::remove_all(workdir);
    fs::create_directories(workdir);
    rows[i] = evaluate_problem(rec, workdir, options.resume, deps);
    write_text_file(state_file, dump_wire({{"complete", true}, {"row", row_to_json(rows[i])}}));
    logger->info("{}: golden {} ({} of {} mutants agree)", rec.problem.id,
                 rows[i].golden == DutStatus::PASS ? "PASS" : "FAIL", rows[i].agreements, rows[i].mutants);
  });

  if (ledger) {
    for (const auto& row : rows) {
      for (Stage s : kAllStages) {
        auto it = row.tokens.find(std::string(stage_name(s)));
        if (it != row.tokens.end()) ledger->add(s, it->second.prompt_tokens, it->second.completion_tokens);
      }
    }
  }
  auto report = build_report(corpus, std::move(rows), options.alphas);
  write_text_file(options.workspace / "eval_report.json", dump_wire(report_to_json(report)));
  write_text_file(options.workspace / "eval_report.txt", format_report_table(report));
  return report;
}

int derive_verdicts(const fs::path& root, Simulator& simulator, const fs::path& scratch) {
  if (!fs::is_directory(root)) throw EvalInputError("corpus " + root.string() + " is not a directory");
  int written = 0;
  for (const auto& dir : sorted_entries(root)) {
    if (!fs::is_directory(dir) || !fs::is_directory(dir / "mutants")) continue;
    auto problem = load_problem_dir(dir);
    std::string tb;
    TraceSet traces{problem.interface, {}};
    if (fs::exists(dir / "golden_tb.cpp")) {
      tb = read_text_file(dir / "golden_tb.cpp");
    } else if (fs::exists(dir / "golden_reference.json")) {
      traces = traces_from_json(read_json_file(dir / "golden_reference.json"), problem.interface);
      tb = emit_testbench(problem.interface, traces, default_codegen_options(problem.interface));
    } else {
      throw EvalInputError("problem " + problem.id + " has neither golden_tb.cpp nor golden_reference.json");
    }
    for (const auto& f : sorted_entries(dir / "mutants")) {
      if (f.extension() != ".v") continue;
      auto outcome = simulator.build_and_run(
          {read_text_file(f), problem.interface, traces, tb, scratch / problem.id / f.stem()});
      if (!outcome.build_ok) {
        throw EvalInputError("mutant " + f.string() + " does not build:\n" + outcome.raw_log);
      }
      write_text_file(fs::path(f).replace_extension(".verdict"), outcome.passed ? "CORRECT\n" : "INCORRECT\n");
      ++written;
    }
  }
  return written;
}

}  // namespace tbgen
