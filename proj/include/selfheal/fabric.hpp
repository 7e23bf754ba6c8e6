#pragma once

#include <array>
#include <cstdlib>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "selfheal/cell.hpp"
#include "selfheal/placement.hpp"
#include "selfheal/timing.hpp"

namespace selfheal {

enum class Alarm { None, Degraded, FailSafe };

inline std::string_view to_string(Alarm a) noexcept {
  switch (a) {
    case Alarm::None: return "none";
    case Alarm::Degraded: return "degraded";
    case Alarm::FailSafe: return "fail_safe";
  }
  return "?";
}

enum class HealAction { Deactivate = 1, Reroute = 2, Restore = 3 };

inline std::string_view to_string(HealAction a) noexcept {
  switch (a) {
    case HealAction::Deactivate: return "deactivate";
    case HealAction::Reroute: return "reroute";
    case HealAction::Restore: return "restore";
  }
  return "?";
}

struct TimedAction {
  HealAction action;
  Nanos time;
  CellId cell;  // faulty cell for Deactivate, the spare otherwise
};

struct HealthSyndrome {
  CellId cell_id;
  FaultClass fault_kind = FaultClass::Permanent;
  Nanos detect_time = 0;
  std::vector<TimedAction> actions;
  std::optional<CellId> chosen_spare;
  std::optional<unsigned> function;
  bool escalated = false;  // handled by the global layer
};

// A reroute or restore the event loop still has to carry out.
struct HealingStep {
  Nanos time;
  HealAction action;
  CellId spare;
  unsigned function;
};

struct CriticalServiceLayer {
  unsigned index = 0;
  std::array<FunctionalCell, kCellsPerLayer> f_cells;
  std::array<FunctionalCell, kCellsPerLayer> r_cells;
  std::array<std::optional<unsigned>, kCellsPerLayer> spare_map{};  // F slot -> R slot
  std::array<bool, kCellsPerLayer> r_reserved{};                    // allocated, restore pending
};

struct GlobalHealthMap {
  Alarm alarm = Alarm::None;
  std::vector<std::pair<CellId, CellHealth>> snapshot;
  std::vector<CellId> free_spares;
};

class Fabric {
 public:
  Fabric() = default;

  explicit Fabric(const RoutedDesign& d) : design_(d) {
    layers_.resize(d.layers.size());
    const std::size_t nfunc = d.layers.size() * kCellsPerLayer;
    provider_.assign(nfunc, std::nullopt);
    function_config_.assign(nfunc, std::nullopt);
    deactivated_.assign(nfunc, false);
    for (unsigned l = 0; l < layers_.size(); ++l) {
      auto& layer = layers_[l];
      layer.index = l;
      for (unsigned s = 0; s < kCellsPerLayer; ++s) {
        layer.f_cells[s] = FunctionalCell::make({l, s, CellKind::F});
        layer.r_cells[s] = FunctionalCell::make({l, s, CellKind::R});
        layer.r_cells[s].code = d.layers[l].spare_codes[s];
        if (const auto& cfg = d.layers[l].f_configs[s]) {
          layer.f_cells[s].load(*cfg);
          const unsigned f = l * kCellsPerLayer + s;
          provider_[f] = layer.f_cells[s].id;
          function_config_[f] = *cfg;
        }
      }
    }
    inputs_.assign(d.netlist.inputs.size(), Value{});
    input_valid_.assign(d.netlist.inputs.size(), false);
    for (std::size_t i = 0; i < inputs_.size(); ++i) inputs_[i] = Value::of(d.netlist.inputs[i].width, 0);
  }

  const RoutedDesign& design() const noexcept { return design_; }
  std::vector<CriticalServiceLayer>& layers() noexcept { return layers_; }
  const std::vector<CriticalServiceLayer>& layers() const noexcept { return layers_; }

  FunctionalCell& cell(CellId id) {
    check(id);
    auto& layer = layers_[id.layer];
    return id.kind == CellKind::F ? layer.f_cells[id.slot] : layer.r_cells[id.slot];
  }
  const FunctionalCell& cell(CellId id) const { return const_cast<Fabric*>(this)->cell(id); }

  bool contains(CellId id) const noexcept { return id.layer < layers_.size() && id.slot < kCellsPerLayer; }

  std::size_t function_count() const noexcept { return provider_.size(); }
  const std::optional<CellId>& provider(unsigned f) const { return provider_.at(f); }
  const std::optional<CellConfig>& function_config(unsigned f) const { return function_config_.at(f); }

  // Function whose configuration this cell currently holds or is being restored with.
  std::optional<unsigned> function_of(CellId id) const {
    for (unsigned f = 0; f < provider_.size(); ++f)
      if (provider_[f] == id) return f;
    for (const auto& step : pending_)
      if (step.spare == id) return step.function;
    return std::nullopt;
  }

  Value function_output(unsigned f) const {
    if (!provider_[f]) return Value::of(function_config_[f] ? function_config_[f]->width : WidthMode::Bit, 0);
    return cell(*provider_[f]).output;
  }

  bool function_valid(unsigned f) const {
    if (!provider_[f]) return deactivated_[f];
    return cell(*provider_[f]).output_valid;
  }

  void set_input(std::size_t i, Value v) {
    inputs_.at(i) = Value::of(design_.netlist.inputs[i].width, v.payload);
    input_valid_[i] = true;
  }
  Value input(std::size_t i) const { return inputs_.at(i); }
  bool input_valid(std::size_t i) const { return input_valid_.at(i); }

  Alarm alarm() const noexcept { return alarm_; }
  void set_alarm(Alarm a) noexcept { alarm_ = a; }

  // Writes every port of `c` from its selectors (the register clock).
  void latch(FunctionalCell& c, Nanos t) {
    for (unsigned i = 0; i < 4; ++i) {
      const auto& sel = c.config.selectors[i];
      const Port p = kPorts[i];
      switch (sel.kind) {
        case SelectorKind::Unused: c.registers.write(p, Value::of(c.config.width, 0), t); break;
        case SelectorKind::Constant: c.registers.write(p, Value::int16(c.config.immediate), t); break;
        case SelectorKind::PrimaryInput: c.registers.write(p, input(sel.index), t, input_valid(sel.index)); break;
        case SelectorKind::CellOutput: c.registers.write(p, function_output(sel.index), t, function_valid(sel.index)); break;
      }
    }
  }

  // Cells whose registers are clocked: evaluating cells plus rerouted spares
  // waiting for their restore step.
  bool clocked(const FunctionalCell& c) const { return c.evaluating() || routed_.count(key(c.id)) != 0; }

  // --- healing primitives -------------------------------------------------

  void deactivate(CellId id) {
    auto& c = cell(id);
    c.deactivate();
    if (auto f = function_of(id); f && provider_[*f] == id) {
      provider_[*f].reset();
      deactivated_[*f] = true;
    }
  }

  void reserve(CellId spare, const HealingStep& reroute, const HealingStep& restore) {
    layers_[spare.layer].r_reserved[spare.slot] = true;
    pending_.push_back(reroute);
    pending_.push_back(restore);
  }

  void apply(const HealingStep& step, Nanos t) {
    auto& spare = cell(step.spare);
    std::erase_if(pending_, [&](const HealingStep& s) {
      return s.spare == step.spare && s.action == step.action && s.time == step.time;
    });
    const auto& cfg = function_config_.at(step.function);
    if (!cfg) return;
    if (step.action == HealAction::Reroute) {
      spare.config = *cfg;
      spare.registers.clear();
      routed_.insert(key(step.spare));
      latch(spare, t);
    } else if (step.action == HealAction::Restore) {
      routed_.erase(key(step.spare));
      layers_[step.spare.layer].r_reserved[step.spare.slot] = false;
      const auto code = encode_genetic(*cfg);  // the configuration memory entry for this function
      spare.code = code;
      spare.load(decode_genetic(code));
      spare.health = CellHealth::SpareActive;
      spare.history = {};
      spare.output_valid = false;
      provider_[step.function] = step.spare;
      deactivated_[step.function] = false;
      if (alarm_ == Alarm::None) alarm_ = Alarm::Degraded;
    }
  }

  GlobalHealthMap health_map() const {
    GlobalHealthMap m;
    m.alarm = alarm_;
    for (const auto& layer : layers_) {
      for (const auto& c : layer.f_cells) m.snapshot.emplace_back(c.id, c.health);
      for (unsigned s = 0; s < kCellsPerLayer; ++s) {
        const auto& c = layer.r_cells[s];
        m.snapshot.emplace_back(c.id, c.health);
        if (c.health == CellHealth::SpareIdle && !layer.r_reserved[s]) m.free_spares.push_back(c.id);
      }
    }
    return m;
  }

  // Primary outputs in declaration order.
  std::vector<std::pair<std::string, unsigned>> const& outputs() const noexcept { return design_.outputs; }

 private:
  static unsigned key(CellId id) noexcept {
    return id.layer * 2 * kCellsPerLayer + (id.kind == CellKind::R ? kCellsPerLayer : 0) + id.slot;
  }
  void check(CellId id) const {
    if (!contains(id)) throw ConfigError("no such cell " + to_string(id));
  }

  RoutedDesign design_;
  std::vector<CriticalServiceLayer> layers_;
  std::vector<std::optional<CellId>> provider_;
  std::vector<std::optional<CellConfig>> function_config_;
  std::vector<bool> deactivated_;
  std::vector<Value> inputs_;
  std::vector<bool> input_valid_;
  std::vector<HealingStep> pending_;
  std::set<unsigned> routed_;
  Alarm alarm_ = Alarm::None;
};

// Lowest-index idle, unreserved R cell of the layer.
inline std::optional<unsigned> allocate_spare(const CriticalServiceLayer& layer) {
  for (unsigned s = 0; s < kCellsPerLayer; ++s)
    if (layer.r_cells[s].health == CellHealth::SpareIdle && !layer.r_reserved[s]) return s;
  return std::nullopt;
}

inline void fail_safe(Fabric& fabric) { fabric.set_alarm(Alarm::FailSafe); }

namespace detail {

inline std::vector<HealingStep> schedule_repair(Fabric& fabric, HealthSyndrome& s, CellId spare,
                                                const TimingParams& timing) {
  const unsigned f = *s.function;
  const HealingStep reroute{s.detect_time + timing.reroute_delay, HealAction::Reroute, spare, f};
  const HealingStep restore{reroute.time + timing.restore_delay, HealAction::Restore, spare, f};
  fabric.reserve(spare, reroute, restore);
  s.chosen_spare = spare;
  s.actions.push_back({HealAction::Reroute, reroute.time, spare});
  s.actions.push_back({HealAction::Restore, restore.time, spare});
  return {reroute, restore};
}

inline void deactivate_for(Fabric& fabric, HealthSyndrome& s) {
  if (!s.function) s.function = fabric.function_of(s.cell_id);
  if (fabric.cell(s.cell_id).health != CellHealth::FaultyDeactivated) fabric.deactivate(s.cell_id);
  if (s.actions.empty() || s.actions.front().action != HealAction::Deactivate)
    s.actions.insert(s.actions.begin(), {HealAction::Deactivate, s.detect_time, s.cell_id});
}

}  // namespace detail

// Three-task local repair of a permanently faulty B cell: deactivate it now,
// reroute its inputs to a local spare after reroute_delay, then restore the
// genetic code in the spare after restore_delay. Returns nullopt when the
// layer has no spare left, in which case the caller escalates.
inline std::optional<std::vector<HealingStep>> local_heal(Fabric& fabric, HealthSyndrome& s,
                                                          const TimingParams& timing) {
  if (s.fault_kind != FaultClass::Permanent) return std::vector<HealingStep>{};
  if (s.cell_id.kind != CellKind::F) return std::nullopt;
  detail::deactivate_for(fabric, s);
  if (!s.function) return std::vector<HealingStep>{};
  auto& layer = fabric.layers()[s.cell_id.layer];
  const auto slot = allocate_spare(layer);
  if (!slot) return std::nullopt;
  layer.spare_map[s.cell_id.slot] = *slot;
  return detail::schedule_repair(fabric, s, {s.cell_id.layer, *slot, CellKind::R}, timing);
}

// Fabric-wide repair: nearest layer with an idle spare (the faulty cell's own
// layer counts as distance 0), lowest slot first. Enters fail-safe when no
// spare is left anywhere.
inline std::vector<HealingStep> global_heal(Fabric& fabric, HealthSyndrome& s, const TimingParams& timing) {
  if (s.fault_kind != FaultClass::Permanent) return {};
  detail::deactivate_for(fabric, s);
  s.escalated = true;
  if (!s.function) return {};
  const int home = static_cast<int>(s.cell_id.layer);
  const int count = static_cast<int>(fabric.layers().size());
  for (int dist = 0; dist < count; ++dist) {
    const int candidates[2] = {home - dist, home + dist};
    for (int k = 0; k < (dist == 0 ? 1 : 2); ++k) {
      const int l = candidates[k];
      if (l < 0 || l >= count) continue;
      if (auto slot = allocate_spare(fabric.layers()[static_cast<unsigned>(l)]))
        return detail::schedule_repair(fabric, s, {static_cast<unsigned>(l), *slot, CellKind::R}, timing);
    }
  }
  fail_safe(fabric);
  return {};
}

// Local first, then global.
inline std::vector<HealingStep> heal(Fabric& fabric, HealthSyndrome& s, const TimingParams& timing) {
  if (auto steps = local_heal(fabric, s, timing)) return *steps;
  return global_heal(fabric, s, timing);
}

}  // namespace selfheal
