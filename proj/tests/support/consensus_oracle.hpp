// Brute-force evaluation of the consensus quantifiers over labelled runs,
// independent of classify_tracesets.
#pragma once

#include <set>
#include <string>
#include <vector>

#include "scripted.hpp"
#include "tbgen/improve.hpp"

namespace tbgen::testing {

inline constexpr int kFailedLabel = -1;

/// One-step trace set whose single output carries `label`.
inline TraceSet labelled_traces(int label) {
  ModuleInterface iface{"lab", {{"x", Direction::input, 1, 0, false, false}, {"y", Direction::output, 4, 0, false, false}}};
  return {iface, {{"s0", {{{{"x", bv(1, 0)}}, {{"y", bv(4, static_cast<std::uint64_t>(label))}}}}}}};
}

inline std::vector<CandidateRun> labelled_runs(const std::vector<int>& labels) {
  std::vector<CandidateRun> runs;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    CandidateRun r;
    r.candidate_index = static_cast<int>(i);
    if (labels[i] == kFailedLabel) {
      r.outcome = ExecutionFailure{"scripted failure"};
    } else {
      r.outcome = labelled_traces(labels[i]);
    }
    runs.push_back(std::move(r));
  }
  return runs;
}

struct OracleVerdict {
  enum Kind { all_failed, consistent, outlier, no_majority } kind = all_failed;
  int outlier_index = -1;
  std::vector<int> evidence;  // labels, in the order the classifier must report them
};

inline OracleVerdict consensus_oracle(const std::vector<int>& labels) {
  std::vector<int> live;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != kFailedLabel) live.push_back(static_cast<int>(i));
  }
  OracleVerdict v;
  if (live.empty()) return v;

  bool all_equal = true;
  for (int i : live) {
    for (int j : live) all_equal = all_equal && labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)];
  }
  if (all_equal) {
    v.kind = OracleVerdict::consistent;
    v.evidence = {labels[static_cast<std::size_t>(live.front())]};
    return v;
  }

  // Exactly one k whose removal leaves an agreeing majority that k differs from.
  std::vector<int> outliers;
  if (live.size() >= 3) {
    for (int k : live) {
      bool rest_equal = true, k_differs = true;
      for (int i : live) {
        if (i == k) continue;
        k_differs = k_differs && labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(k)];
        for (int j : live) {
          if (j != k) rest_equal = rest_equal && labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)];
        }
      }
      if (rest_equal && k_differs) outliers.push_back(k);
    }
  }
  if (outliers.size() == 1) {
    v.kind = OracleVerdict::outlier;
    v.outlier_index = outliers.front();
    for (int i : live) {
      if (i != v.outlier_index) v.evidence.push_back(labels[static_cast<std::size_t>(i)]);
    }
    return v;
  }

  v.kind = OracleVerdict::no_majority;
  std::set<int> seen;
  for (int i : live) {
    if (seen.insert(labels[static_cast<std::size_t>(i)]).second) v.evidence.push_back(labels[static_cast<std::size_t>(i)]);
  }
  return v;
}

/// Empty string when classify_tracesets agrees with the oracle, else why not.
inline std::string check_consensus(const std::vector<int>& labels) {
  auto expected = consensus_oracle(labels);
  auto runs = labelled_runs(labels);
  std::string tag;
  for (int l : labels) tag += std::to_string(l) + " ";
  auto same_evidence = [&](const std::vector<TraceSet>& got) {
    if (got.size() != expected.evidence.size()) return false;
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (!(got[i] == labelled_traces(expected.evidence[i]))) return false;
    }
    return true;
  };
  try {
    auto c = classify_tracesets(runs);
    if (expected.kind == OracleVerdict::all_failed) return tag + ": expected AllCandidatesFailedError";
    if (auto* cs = std::get_if<Consistent>(&c)) {
      if (expected.kind != OracleVerdict::consistent) return tag + ": got consistent";
      if (!(cs->representative == labelled_traces(expected.evidence.front()))) return tag + ": wrong representative";
      return {};
    }
    if (auto* of = std::get_if<OutlierFiltered>(&c)) {
      if (expected.kind != OracleVerdict::outlier) return tag + ": got outlier_filtered";
      if (of->outlier_index != expected.outlier_index) return tag + ": wrong outlier index";
      if (!same_evidence(of->evidence)) return tag + ": wrong outlier evidence";
      return {};
    }
    const auto& nm = std::get<NoMajority>(c);
    if (expected.kind != OracleVerdict::no_majority) return tag + ": got no_majority";
    if (!same_evidence(nm.evidence)) return tag + ": wrong no-majority evidence";
    return {};
  } catch (const AllCandidatesFailedError&) {
    return expected.kind == OracleVerdict::all_failed ? std::string() : tag + ": unexpected AllCandidatesFailedError";
  }
}

}  // namespace tbgen::testing
