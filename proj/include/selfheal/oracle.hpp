#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "selfheal/netlist.hpp"

namespace selfheal {

// Ideal, redundancy-free evaluation of a netlist. Written directly against the
// netlist so it shares no code with the cell model it is used to check.

using DelayState = std::vector<std::vector<std::int32_t>>;  // per node, newest stage first

inline DelayState initial_delay_state(const Netlist& n) {
  DelayState s(n.nodes.size());
  for (std::size_t i = 0; i < n.nodes.size(); ++i)
    if (n.nodes[i].op == Opcode::Delay) s[i].assign(n.nodes[i].delay, 0);
  return s;
}

struct ReferenceResult {
  std::vector<std::int32_t> outputs;  // in Netlist::outputs order
  std::vector<std::int32_t> node_values;
  DelayState next_state;
};

namespace detail {

inline std::int32_t fit(WidthMode w, std::int64_t v) {
  if (w == WidthMode::Bit) return static_cast<std::int32_t>(v & 1);
  v &= 0xFFFF;
  return static_cast<std::int32_t>(v >= 0x8000 ? v - 0x10000 : v);
}

}  // namespace detail

inline ReferenceResult reference_eval(const Netlist& n, std::span<const std::int32_t> inputs, const DelayState& state) {
  if (inputs.size() != n.inputs.size())
    throw ConfigError("reference_eval: expected " + std::to_string(n.inputs.size()) + " input values, got " +
                      std::to_string(inputs.size()));
  if (state.size() != n.nodes.size()) throw ConfigError("reference_eval: delay state does not match netlist");

  ReferenceResult r;
  r.node_values.assign(n.nodes.size(), 0);
  std::vector<char> done(n.nodes.size(), 0);

  auto eval = [&](auto&& self, std::size_t i) -> std::int32_t {
    if (done[i]) return r.node_values[i];
    const auto& node = n.nodes[i];
    if (node.op == Opcode::Delay) {
      done[i] = 1;
      return r.node_values[i] = state[i].empty() ? 0 : state[i].back();
    }
    std::vector<std::int64_t> a;
    std::vector<bool> a_is_bit;
    for (const auto& op : node.operands) {
      switch (op.kind) {
        case RefKind::Input:
          a.push_back(detail::fit(n.inputs[op.index].width, inputs[op.index]));
          a_is_bit.push_back(n.inputs[op.index].width == WidthMode::Bit);
          break;
        case RefKind::Node:
          a.push_back(self(self, op.index));
          a_is_bit.push_back(n.nodes[op.index].width == WidthMode::Bit);
          break;
        case RefKind::Immediate:
          a.push_back(node.immediate);
          a_is_bit.push_back(false);
          break;
      }
    }
    std::int64_t v = 0;
    switch (node.op) {
      case Opcode::Nop: v = 0; break;
      case Opcode::And:
        v = a[0];
        for (std::size_t k = 1; k < a.size(); ++k) v &= a[k];
        break;
      case Opcode::Or:
        for (auto x : a) v |= x;
        break;
      case Opcode::Not: v = ~a[0]; break;
      case Opcode::Add:
        for (auto x : a) v += x;
        break;
      case Opcode::Sub: v = a[0] - a[1]; break;
      case Opcode::Mul: {
        const std::int64_t gain = a_is_bit[1] ? a[1] * 256 : a[1];
        const std::int64_t prod = a[0] * gain;
        // floor division by 256
        v = prod >= 0 ? prod / 256 : -((-prod + 255) / 256);
        break;
      }
      case Opcode::Cmp: v = a[0] >= a[1] ? 1 : 0; break;
      case Opcode::Mux: v = a[0] == 0 ? a[1] : a[2]; break;
      case Opcode::Delay: break;
    }
    done[i] = 1;
    return r.node_values[i] = detail::fit(node.width, v);
  };

  for (std::size_t i = 0; i < n.nodes.size(); ++i) eval(eval, i);
  for (const auto& o : n.outputs) r.outputs.push_back(r.node_values[o.node]);

  r.next_state = state;
  for (std::size_t i = 0; i < n.nodes.size(); ++i) {
    if (n.nodes[i].op != Opcode::Delay || state[i].empty()) continue;
    auto& pipe = r.next_state[i];
    for (std::size_t k = pipe.size() - 1; k > 0; --k) pipe[k] = pipe[k - 1];
    const auto& src = n.nodes[i].operands[0];
    std::int64_t in = 0;
    if (src.kind == RefKind::Input)
      in = inputs[src.index];
    else if (src.kind == RefKind::Node)
      in = r.node_values[src.index];
    else
      in = n.nodes[i].immediate;
    pipe[0] = detail::fit(n.nodes[i].width, in);
  }
  return r;
}

inline ReferenceResult reference_eval(const Netlist& n, const std::map<std::string, std::int32_t>& named,
                                      const DelayState& state) {
  std::vector<std::int32_t> in;
  for (const auto& i : n.inputs) {
    auto it = named.find(i.name);
    if (it == named.end()) throw ConfigError("reference_eval: no value for input '" + i.name + "'");
    in.push_back(it->second);
  }
  return reference_eval(n, in, state);
}

}  // namespace selfheal
