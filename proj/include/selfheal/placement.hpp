#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "selfheal/genetic_code.hpp"
#include "selfheal/netlist.hpp"

namespace selfheal {

inline constexpr unsigned kCellsPerLayer = 4;
// Six-bit CellOutput selectors address at most 64 functions.
inline constexpr unsigned kMaxLayers = 64 / kCellsPerLayer;

struct SlotRef {
  unsigned layer = 0;
  unsigned slot = 0;

  unsigned function_index() const noexcept { return layer * kCellsPerLayer + slot; }
  friend bool operator==(const SlotRef&, const SlotRef&) = default;
};

struct Placement {
  std::vector<SlotRef> node_slot;  // indexed like Netlist::nodes
  unsigned layer_count = 0;
  std::vector<std::pair<std::string, unsigned>> input_binding;  // input name -> global input index

  friend bool operator==(const Placement&, const Placement&) = default;
};

// Greedy fill: nodes ordered by (depth, declaration order), four per layer.
// Each declared partition starts on a fresh layer.
inline Placement place(const Netlist& n, unsigned capacity = kCellsPerLayer, unsigned max_layers = kMaxLayers) {
  if (capacity == 0 || capacity > kCellsPerLayer) throw ConfigError("layer capacity must be 1..4");
  Placement p;
  p.node_slot.resize(n.nodes.size());
  for (std::size_t i = 0; i < n.inputs.size(); ++i) p.input_binding.emplace_back(n.inputs[i].name, static_cast<unsigned>(i));
  if (n.nodes.empty()) return p;

  const auto rep = depth(n);
  std::vector<std::vector<std::size_t>> groups;
  if (n.partitions.empty()) {
    groups.emplace_back(n.nodes.size());
    std::iota(groups.back().begin(), groups.back().end(), std::size_t{0});
  } else {
    for (const auto& part : n.partitions) groups.push_back(part.nodes);
  }

  unsigned layer = 0;
  for (auto& g : groups) {
    std::stable_sort(g.begin(), g.end(), [&](std::size_t a, std::size_t b) {
      if (rep.node_depth[a] != rep.node_depth[b]) return rep.node_depth[a] < rep.node_depth[b];
      return a < b;
    });
    unsigned slot = 0;
    for (auto idx : g) {
      if (slot == capacity) {
        slot = 0;
        ++layer;
      }
      p.node_slot[idx] = {layer, slot++};
    }
    if (slot > 0) ++layer;
  }
  p.layer_count = layer;
  if (p.layer_count > max_layers)
    throw NetlistError(NetlistErrorKind::Capacity, 0,
                       "netlist needs " + std::to_string(p.layer_count) + " layers, fabric has " +
                           std::to_string(max_layers));
  return p;
}

struct LayerConfig {
  std::array<std::optional<CellConfig>, kCellsPerLayer> f_configs{};
  std::array<std::optional<std::size_t>, kCellsPerLayer> f_nodes{};  // netlist node per slot
  std::array<GeneticCode, kCellsPerLayer> spare_codes{};              // pre-generated R codes
};

struct RoutedDesign {
  Netlist netlist;
  Placement placement;
  std::vector<CellConfig> node_configs;  // indexed like Netlist::nodes
  std::vector<GeneticCode> node_codes;
  std::vector<LayerConfig> layers;
  std::vector<std::pair<std::string, unsigned>> outputs;  // output name -> function index

  std::size_t spare_code_count() const noexcept { return layers.size() * kCellsPerLayer; }
};

inline CellConfig node_config(const Netlist& n, const Placement& p, std::size_t node_index) {
  const auto& node = n.nodes[node_index];
  if (node.operands.size() > 4)
    throw NetlistError(NetlistErrorKind::Arity, node.line, "node '" + node.id + "' needs more than 4 input ports");
  CellConfig c;
  c.opcode = node.op;
  c.immediate = node.immediate;
  c.delay_cycles = node.delay;
  c.output_enable = true;
  c.width = node.width;
  for (std::size_t k = 0; k < node.operands.size(); ++k) {
    const auto& r = node.operands[k];
    switch (r.kind) {
      case RefKind::Input: c.selectors[k] = InputSelector::input(static_cast<unsigned>(r.index)); break;
      case RefKind::Node: c.selectors[k] = InputSelector::cell(p.node_slot[r.index].function_index()); break;
      case RefKind::Immediate: c.selectors[k] = InputSelector::constant(); break;
    }
  }
  return c;
}

// Translates operands into selectors, encodes every configuration and
// pre-loads each layer's spare R_i with the code of F_i.
inline RoutedDesign build_routing(const Netlist& n, const Placement& p) {
  RoutedDesign d;
  d.netlist = n;
  d.placement = p;
  d.layers.resize(p.layer_count);
  for (std::size_t i = 0; i < n.nodes.size(); ++i) {
    auto cfg = node_config(n, p, i);
    d.node_codes.push_back(encode_genetic(cfg));
    const auto s = p.node_slot[i];
    d.layers[s.layer].f_configs[s.slot] = cfg;
    d.layers[s.layer].f_nodes[s.slot] = i;
    d.node_configs.push_back(std::move(cfg));
  }
  const auto idle_code = encode_genetic(CellConfig{});
  for (auto& layer : d.layers)
    for (unsigned s = 0; s < kCellsPerLayer; ++s)
      layer.spare_codes[s] = layer.f_configs[s] ? encode_genetic(*layer.f_configs[s]) : idle_code;
  for (const auto& o : n.outputs) d.outputs.emplace_back(o.name, p.node_slot[o.node].function_index());
  return d;
}

inline RoutedDesign map_netlist(const Netlist& n) { return build_routing(n, place(n)); }

// One line per cell: `layer.slot kind opcode selectors code=<hex>`.
inline std::string dump_configuration(const RoutedDesign& d) {
  std::ostringstream os;
  for (std::size_t l = 0; l < d.layers.size(); ++l) {
    const auto& layer = d.layers[l];
    for (unsigned s = 0; s < kCellsPerLayer; ++s) {
      const CellConfig cfg = layer.f_configs[s].value_or(CellConfig{});
      os << l << '.' << s << " F " << to_string(cfg.opcode);
      for (Port port : kPorts) os << ' ' << to_string(port) << '=' << to_string(cfg.selector(port));
      os << " code=" << encode_genetic(cfg).to_hex();
      if (layer.f_nodes[s]) os << "  # " << d.netlist.nodes[*layer.f_nodes[s]].id;
      os << '\n';
    }
    for (unsigned s = 0; s < kCellsPerLayer; ++s) {
      const auto cfg = decode_genetic(layer.spare_codes[s]);
      os << l << '.' << s << " R " << to_string(cfg.opcode);
      for (Port port : kPorts) os << ' ' << to_string(port) << '=' << to_string(cfg.selector(port));
      os << " code=" << layer.spare_codes[s].to_hex() << '\n';
    }
  }
  return os.str();
}

}  // namespace selfheal
