#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "selfheal/selfheal.hpp"

namespace selfheal::testing {

struct RandomNetlistOptions {
  unsigned max_nodes = 20;
  unsigned max_inputs = 8;
  bool allow_delay = true;
};

// Width-correct random netlist text. Every node plans its opcode and width
// first, so DELAY nodes may also point forward and close feedback loops.
inline std::string random_netlist_text(std::mt19937_64& rng, const RandomNetlistOptions& opt = {}) {
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  auto chance = [&](unsigned pct) { return rng() % 100 < pct; };

  const unsigned n_inputs = 2 + static_cast<unsigned>(pick(opt.max_inputs - 1));
  const unsigned n_nodes = 1 + static_cast<unsigned>(pick(opt.max_nodes));

  struct Sig {
    std::string name;
    WidthMode width;
  };
  std::vector<Sig> inputs;
  for (unsigned i = 0; i < n_inputs; ++i) {
    // at least one input of each width
    const WidthMode w = i == 0 ? WidthMode::Bit : i == 1 ? WidthMode::Int16 : chance(60) ? WidthMode::Bit : WidthMode::Int16;
    inputs.push_back({"in" + std::to_string(i), w});
  }

  static constexpr Opcode kOps[] = {Opcode::And, Opcode::Or, Opcode::Not, Opcode::Add, Opcode::Sub,
                                    Opcode::Mul, Opcode::Cmp, Opcode::Mux, Opcode::Delay};
  std::vector<Opcode> ops(n_nodes);
  std::vector<WidthMode> widths(n_nodes);
  for (unsigned i = 0; i < n_nodes; ++i) {
    Opcode op;
    do op = kOps[pick(std::size(kOps))];
    while (op == Opcode::Delay && !opt.allow_delay);
    ops[i] = op;
    switch (op) {
      case Opcode::Add:
      case Opcode::Sub:
      case Opcode::Mul: widths[i] = WidthMode::Int16; break;
      case Opcode::Cmp: widths[i] = WidthMode::Bit; break;
      default: widths[i] = chance(55) ? WidthMode::Bit : WidthMode::Int16; break;
    }
  }

  auto node_name = [](std::size_t i) { return "n" + std::to_string(i); };
  // Signals usable by node i: inputs plus earlier nodes, or any other node for DELAY.
  auto pool = [&](unsigned i, std::optional<WidthMode> w) {
    std::vector<std::string> out;
    for (const auto& s : inputs)
      if (!w || s.width == *w) out.push_back(s.name);
    for (unsigned j = 0; j < n_nodes; ++j) {
      const bool ok = ops[i] == Opcode::Delay ? j != i : j < i;
      if (ok && (!w || widths[j] == *w)) out.push_back(node_name(j));
    }
    return out;
  };
  auto imm_value = [&](WidthMode w) -> int {
    return w == WidthMode::Bit ? static_cast<int>(rng() % 2) : static_cast<int>(rng() % 601) - 300;
  };

  std::ostringstream os;
  for (const auto& s : inputs) os << "input " << s.name << " : " << to_string(s.width) << '\n';
  for (unsigned i = 0; i < n_nodes; ++i) {
    const Opcode op = ops[i];
    const WidthMode w = widths[i];
    std::vector<std::string> operands;
    std::optional<int> imm;
    auto operand = [&](std::optional<WidthMode> want, bool imm_ok) {
      if (imm_ok && !imm && chance(12)) {
        imm = imm_value(want.value_or(WidthMode::Int16));
        operands.push_back("imm");
        return;
      }
      const auto p = pool(i, want);
      operands.push_back(p[pick(p.size())]);
    };
    switch (op) {
      case Opcode::And:
      case Opcode::Or: {
        const unsigned arity = 2 + static_cast<unsigned>(pick(3));
        for (unsigned k = 0; k < arity; ++k) operand(w, k > 0);
        break;
      }
      case Opcode::Not: operand(w, false); break;
      case Opcode::Add: {
        const unsigned arity = 2 + static_cast<unsigned>(pick(3));
        for (unsigned k = 0; k < arity; ++k) operand(std::nullopt, k > 0);
        break;
      }
      case Opcode::Sub:
      case Opcode::Cmp:
        operand(std::nullopt, false);
        operand(std::nullopt, true);
        break;
      case Opcode::Mul:
        operand(std::nullopt, false);
        operand(std::nullopt, true);
        break;
      case Opcode::Mux:
        operand(WidthMode::Bit, false);
        operand(w, true);
        operand(w, true);
        break;
      case Opcode::Delay: operand(w, false); break;
      default: break;
    }
    os << "node " << node_name(i) << " = " << to_string(op) << '(';
    for (std::size_t k = 0; k < operands.size(); ++k) os << (k ? ", " : "") << operands[k];
    os << ')';
    if (imm) os << " imm=" << *imm;
    if (op == Opcode::Delay) os << " delay=" << (1 + pick(2));
    os << '\n';
  }
  const unsigned n_out = 1 + static_cast<unsigned>(pick(std::min(3u, n_nodes)));
  std::vector<unsigned> chosen{n_nodes - 1};
  while (chosen.size() < n_out) {
    const auto j = static_cast<unsigned>(pick(n_nodes));
    if (std::find(chosen.begin(), chosen.end(), j) == chosen.end()) chosen.push_back(j);
  }
  for (std::size_t k = 0; k < chosen.size(); ++k) os << "output o" << k << " = " << node_name(chosen[k]) << '\n';
  return os.str();
}

inline std::int32_t random_input_value(std::mt19937_64& rng, WidthMode w) {
  return w == WidthMode::Bit ? static_cast<std::int32_t>(rng() & 1)
                             : wrap16(static_cast<std::int64_t>(rng() & 0xFFFF));
}

struct EquivalenceCase {
  bool ok = true;
  std::string detail;
};

// Runs `vectors` input vectors through the simulator, one per sample period,
// and compares the outputs sampled at each period end with reference_eval.
// With `fault_per_layer`, one random F cell per layer gets a permanent fault
// during a warm-up and the comparison starts after it.
inline EquivalenceCase check_equivalence(const Netlist& n, std::mt19937_64& rng, unsigned vectors, bool fault_per_layer) {
  Scenario s;
  s.name = n.name;
  s.application = n.name;
  s.netlist = n;
  const auto rep = depth(n);
  s.timing.stimulus_period = s.timing.cell_delay * (rep.critical_path + 2);
  const Nanos period = s.timing.stimulus_period;
  // Long enough for the latest fault to become observable and be repaired.
  const auto& tm = s.timing;
  const Nanos heal_span = tm.cell_delay * (5 + rep.critical_path + tm.threshold) + tm.reroute_delay + tm.restore_delay;
  const unsigned warmup = fault_per_layer ? static_cast<unsigned>((heal_span + period - 1) / period) + 1 : 0;

  std::vector<std::vector<std::int32_t>> vecs;
  for (unsigned k = 0; k < vectors; ++k) {
    std::vector<std::int32_t> v;
    for (const auto& in : n.inputs) v.push_back(random_input_value(rng, in.width));
    vecs.push_back(std::move(v));
  }
  auto apply = [&](Nanos t, const std::vector<std::int32_t>& v) {
    for (std::size_t i = 0; i < n.inputs.size(); ++i) s.stimulus.push_back({t, n.inputs[i].name, v[i]});
  };
  if (warmup) apply(0, vecs[0]);
  for (unsigned k = 0; k < vectors; ++k) apply(static_cast<Nanos>(warmup + k) * period, vecs[k]);
  s.run_until = static_cast<Nanos>(warmup + vectors) * period;

  const auto placement = place(n);
  if (fault_per_layer) {
    for (unsigned l = 0; l < placement.layer_count; ++l) {
      std::vector<unsigned> slots;
      for (std::size_t i = 0; i < n.nodes.size(); ++i)
        if (placement.node_slot[i].layer == l) slots.push_back(placement.node_slot[i].slot);
      FaultSpec f;
      f.kind = FaultKind::PermanentGfb;
      f.cell = CellId{l, slots[rng() % slots.size()], CellKind::F};
      f.time = s.timing.cell_delay * static_cast<Nanos>(1 + rng() % 4);
      f.flip_mask = 1 | static_cast<std::int32_t>(rng() & 0xFFFE);
      s.faults.push_back(f);
    }
  }

  const auto r = simulate(s);
  EquivalenceCase out;
  if (fault_per_layer) {
    std::size_t restored = 0;
    for (const auto& syn : r.syndromes)
      if (syn.fault_kind == FaultClass::Permanent && syn.chosen_spare) ++restored;
    if (restored != placement.layer_count || r.alarm == Alarm::FailSafe) {
      out.ok = false;
      out.detail = "expected " + std::to_string(placement.layer_count) + " repaired faults, got " + std::to_string(restored);
      return out;
    }
    if (!r.restore_times.empty() && *std::max_element(r.restore_times.begin(), r.restore_times.end()) >= static_cast<Nanos>(warmup) * period) {
      out.ok = false;
      out.detail = "healing did not finish within the warm-up";
      return out;
    }
  }

  auto state = initial_delay_state(n);
  for (unsigned k = 0; k < vectors; ++k) {
    const auto ref = reference_eval(n, vecs[k], state);
    state = ref.next_state;
    const Nanos t = static_cast<Nanos>(warmup + k + 1) * period;
    const auto got = outputs_at(r.trace, t);
    for (std::size_t o = 0; o < n.outputs.size(); ++o) {
      const auto it = got.find(n.outputs[o].name);
      if (it == got.end() || it->second != ref.outputs[o]) {
        out.ok = false;
        out.detail = "vector " + std::to_string(k) + " output " + n.outputs[o].name + ": simulator " +
                     (it == got.end() ? std::string("none") : std::to_string(it->second)) + ", reference " +
                     std::to_string(ref.outputs[o]);
        return out;
      }
    }
  }
  return out;
}

}  // namespace selfheal::testing
