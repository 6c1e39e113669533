// Random interfaces, suites, trace sets and diffs for property tests.
#pragma once

#include <random>
#include <string>

#include "tbgen/signals.hpp"

namespace tbgen::testing {

class SignalRng {
 public:
  explicit SignalRng(std::uint32_t seed) : gen_(seed) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  bool coin() { return uniform(0, 1) == 1; }

  BitVector value(unsigned width) {
    BigUint v = 0;
    for (unsigned i = 0; i < width; ++i) v = (v << 1) | (coin() ? 1 : 0);
    return BitVector(width, v);
  }

  unsigned width() {
    // Mostly narrow ports, sometimes wider than a machine word.
    int r = uniform(0, 9);
    if (r < 6) return static_cast<unsigned>(uniform(1, 8));
    if (r < 9) return static_cast<unsigned>(uniform(9, 64));
    return static_cast<unsigned>(uniform(65, 130));
  }

  std::string identifier(const std::string& prefix) {
    static const std::string tail = "abcdefghijklmnopqrstuvwxyz0123456789_";
    std::string s = prefix;
    int n = uniform(0, 6);
    for (int i = 0; i < n; ++i) s.push_back(tail[static_cast<std::size_t>(uniform(0, static_cast<int>(tail.size()) - 1))]);
    return s;
  }

  ModuleInterface interface() {
    ModuleInterface iface;
    iface.module_name = identifier("m");
    bool clocked = coin();
    if (clocked) iface.ports.push_back({"clk", Direction::input, 1, 0, true, false});
    int ins = uniform(1, 4), outs = uniform(1, 3);
    for (int i = 0; i < ins; ++i) {
      iface.ports.push_back({"i" + std::to_string(i) + identifier("_"), Direction::input, width(), uniform(0, 2), false, false});
    }
    for (int i = 0; i < outs; ++i) {
      iface.ports.push_back({"o" + std::to_string(i) + identifier("_"), Direction::output, width(), 0, false, false});
    }
    return iface;
  }

  SignalMap inputs(const ModuleInterface& iface) {
    SignalMap m;
    for (const auto* p : iface.data_inputs()) m.emplace(p->name, value(p->width));
    return m;
  }
  SignalMap outputs(const ModuleInterface& iface) {
    SignalMap m;
    for (const auto* p : iface.outputs()) m.emplace(p->name, value(p->width));
    return m;
  }

  std::string scenario_id(int i) { return "s" + std::to_string(i) + identifier("_"); }

  StimulusSuite suite(const ModuleInterface& iface) {
    StimulusSuite s{iface, {}};
    int n = uniform(1, 4);
    for (int i = 0; i < n; ++i) {
      Scenario sc{scenario_id(i), {}};
      int steps = uniform(1, 6);
      for (int k = 0; k < steps; ++k) sc.steps.push_back({inputs(iface)});
      s.scenarios.push_back(std::move(sc));
    }
    return s;
  }

  TraceSet traces(const ModuleInterface& iface) {
    TraceSet t{iface, {}};
    int n = uniform(1, 4);
    for (int i = 0; i < n; ++i) {
      Trace tr{scenario_id(i), {}};
      int steps = uniform(1, 6);
      for (int k = 0; k < steps; ++k) tr.steps.push_back({inputs(iface), outputs(iface)});
      t.traces.push_back(std::move(tr));
    }
    return t;
  }

  TraceDiff diff() {
    static const std::string id_chars = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-";
    TraceDiff d;
    int n = uniform(1, 12);
    for (int i = 0; i < n; ++i) d.scenario_id.push_back(id_chars[static_cast<std::size_t>(uniform(0, static_cast<int>(id_chars.size()) - 1))]);
    d.step_index = static_cast<std::size_t>(uniform(0, 5000));
    d.signal = identifier(coin() ? "q" : "out_");
    unsigned w = width();
    d.expected = value(w);
    d.actual = value(w);
    return d;
  }

  std::mt19937& engine() { return gen_; }

 private:
  std::mt19937 gen_;
};

}  // namespace tbgen::testing
