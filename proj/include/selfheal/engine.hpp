#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "selfheal/applications.hpp"
#include "selfheal/fabric.hpp"
#include "selfheal/netlist.hpp"
#include "selfheal/placement.hpp"
#include "selfheal/timing.hpp"
#include "selfheal/trace.hpp"

namespace selfheal {

// ---------------------------------------------------------------------------
// Scenario description
// ---------------------------------------------------------------------------

enum class FaultKind { TransientRegister, PermanentGfb, IntermittentBurst };

inline std::string_view to_string(FaultKind k) noexcept {
  switch (k) {
    case FaultKind::TransientRegister: return "transient";
    case FaultKind::PermanentGfb: return "permanent";
    case FaultKind::IntermittentBurst: return "intermittent";
  }
  return "?";
}

struct FaultSpec {
  FaultKind kind = FaultKind::TransientRegister;
  std::optional<CellId> cell;  // either a cell id ...
  std::string node;            // ... or the netlist node whose home cell is targeted
  Port port = Port::North;
  unsigned replica = 0;
  Nanos time = 0;
  Nanos period = 0;  // IntermittentBurst
  unsigned count = 0;
  std::int32_t flip_mask = 1;
  std::optional<std::int32_t> stuck_value;

  void validate() const {
    if (!cell && node.empty()) throw ConfigError("fault has no target cell or node");
    if (replica > 2) throw ConfigError("fault replica must be 0, 1 or 2");
    if (time < 0) throw ConfigError("fault time must be >= 0");
    if (!stuck_value && flip_mask == 0) throw ConfigError("fault needs a non-zero flip mask or a stuck value");
    if (kind == FaultKind::IntermittentBurst) {
      if (count == 0) throw ConfigError("intermittent fault needs count >= 1");
      if (period <= 0 && count > 1) throw ConfigError("intermittent fault needs period > 0");
    }
  }
};

struct StimulusChange {
  Nanos time = 0;
  std::string name;
  std::int32_t value = 0;
};

// Closed loop: at every sample strobe `drive` is fed through the plant and
// the new state is written back to input `feedback`.
struct PlantLoop {
  PlantParams params;
  std::string drive = "throttle";
  std::string feedback = "actual_speed";
};

// Random values for the listed inputs every `period` starting at `start`.
struct RandomStimulus {
  std::vector<std::string> inputs;
  Nanos start = 0;
  Nanos period = 0;
  unsigned count = 0;
};

struct Scenario {
  std::string name;
  std::string application;
  Netlist netlist;
  TimingParams timing;
  std::vector<StimulusChange> stimulus;
  std::vector<FaultSpec> faults;
  Nanos run_until = 0;
  std::uint64_t seed = 0;
  std::optional<PlantLoop> plant;
  std::optional<RandomStimulus> random_stimulus;

  void validate() const {
    timing.validate();
    if (run_until <= 0) throw ConfigError("run_until must be > 0");
    if (netlist.nodes.empty()) throw ConfigError("scenario '" + name + "' has an empty netlist");
    std::vector<bool> at_zero(netlist.inputs.size(), false);
    for (const auto& s : stimulus) {
      const auto i = netlist.find_input(s.name);
      if (!i) throw ConfigError("stimulus names unknown input '" + s.name + "'");
      if (s.time < 0) throw ConfigError("stimulus time must be >= 0");
      if (s.time == 0) at_zero[*i] = true;
    }
    if (random_stimulus) {
      for (const auto& n : random_stimulus->inputs) {
        const auto i = netlist.find_input(n);
        if (!i) throw ConfigError("random_stimulus names unknown input '" + n + "'");
        if (random_stimulus->start == 0 && random_stimulus->count > 0) at_zero[*i] = true;
      }
      if (random_stimulus->count > 1 && random_stimulus->period <= 0)
        throw ConfigError("random_stimulus.period must be > 0");
    }
    for (std::size_t i = 0; i < at_zero.size(); ++i)
      if (!at_zero[i]) throw ConfigError("stimulus does not set input '" + netlist.inputs[i].name + "' at t=0");
    for (const auto& f : faults) {
      f.validate();
      if (!f.node.empty() && !netlist.find_node(f.node))
        throw ConfigError("fault targets unknown node '" + f.node + "'");
    }
    if (plant) {
      plant->params.validate();
      if (!netlist.find_output(plant->drive)) throw ConfigError("plant drive '" + plant->drive + "' is not an output");
      if (!netlist.find_input(plant->feedback))
        throw ConfigError("plant feedback '" + plant->feedback + "' is not an input");
    }
  }

  Scenario without_faults() const {
    Scenario s = *this;
    s.faults.clear();
    return s;
  }
};

// ---------------------------------------------------------------------------
// Event kernel
// ---------------------------------------------------------------------------

enum class EventKind { InjectFault, Evaluate, Strobe, StimulusChange, HealingStep, Stop };

struct Event {
  Nanos time = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Stop;
  std::size_t payload = 0;  // index into the kernel's fault / stimulus / step tables
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const noexcept {
    return a.time != b.time ? a.time > b.time : a.seq > b.seq;
  }
};

struct InjectionRecord {
  FaultKind kind = FaultKind::TransientRegister;
  CellId cell;
  Port port = Port::North;
  unsigned replica = 0;
  Nanos time = 0;
  bool applied = false;  // false when the target was already deactivated
};

struct SimulationResult {
  Trace trace;
  std::vector<HealthSyndrome> syndromes;
  GlobalHealthMap health;
  std::vector<InjectionRecord> injections;
  std::vector<Nanos> restore_times;
  std::map<std::string, Nanos> first_valid;  // per primary output
  Alarm alarm = Alarm::None;
  Nanos fail_safe_time = -1;
  std::size_t events_processed = 0;
  bool reached_stop = false;
};

inline CellId resolve_target(const FaultSpec& f, const RoutedDesign& d) {
  if (f.cell) return *f.cell;
  const auto idx = d.netlist.find_node(f.node);
  if (!idx) throw ConfigError("fault targets unknown node '" + f.node + "'");
  const auto slot = d.placement.node_slot[*idx];
  return {slot.layer, slot.slot, CellKind::F};
}

class Simulator {
 public:
  explicit Simulator(const Scenario& s) : scenario_(s) {
    scenario_.validate();
    fabric_ = Fabric(map_netlist(scenario_.netlist));
    auto& tr = result_.trace;
    tr.scenario = scenario_.name;
    tr.timing = scenario_.timing;
    for (const auto& in : scenario_.netlist.inputs) input_sig_.push_back(tr.intern(in.name, in.width, SignalRole::PrimaryInput));
    for (const auto& [name, f] : fabric_.outputs()) {
      const auto node = scenario_.netlist.outputs[output_sig_.size()].node;
      output_sig_.push_back(tr.intern(name, scenario_.netlist.nodes[node].width, SignalRole::PrimaryOutput));
    }
    alarm_sig_ = tr.intern("alarm", WidthMode::Int16);
    for (const auto& f : scenario_.faults) {
      const CellId target = resolve_target(f, fabric_.design());
      if (!fabric_.contains(target)) throw ConfigError("fault targets missing cell " + to_string(target));
      if (f.kind == FaultKind::IntermittentBurst) {
        for (unsigned k = 0; k < f.count; ++k) {
          FaultSpec t = f;
          t.kind = FaultKind::TransientRegister;
          t.time = f.time + static_cast<Nanos>(k) * f.period;
          t.cell = target;
          faults_.push_back(t);
        }
      } else {
        FaultSpec t = f;
        t.cell = target;
        faults_.push_back(t);
      }
    }
    stimuli_ = scenario_.stimulus;
    if (const auto& rs = scenario_.random_stimulus) {
      std::mt19937_64 rng(scenario_.seed);
      for (unsigned k = 0; k < rs->count; ++k) {
        for (const auto& name : rs->inputs) {
          const auto i = *scenario_.netlist.find_input(name);
          const auto raw = rng();
          const std::int32_t v = scenario_.netlist.inputs[i].width == WidthMode::Bit
                                     ? static_cast<std::int32_t>(raw & 1)
                                     : wrap16(static_cast<std::int64_t>(raw & 0xFFFF));
          stimuli_.push_back({rs->start + static_cast<Nanos>(k) * rs->period, name, v});
        }
      }
    }
    std::stable_sort(stimuli_.begin(), stimuli_.end(),
                     [](const StimulusChange& a, const StimulusChange& b) { return a.time < b.time; });
  }

  SimulationResult run() && {
    const auto& tm = scenario_.timing;
    const Nanos end = scenario_.run_until;
    std::vector<std::size_t> order(faults_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return faults_[a].time < faults_[b].time; });
    for (auto i : order)
      if (faults_[i].time <= end) schedule(faults_[i].time, EventKind::InjectFault, i);
    for (Nanos t = tm.cell_delay; t <= end; t += tm.cell_delay) schedule(t, EventKind::Evaluate);
    for (Nanos t = tm.stimulus_period; t <= end; t += tm.stimulus_period) schedule(t, EventKind::Strobe);
    for (std::size_t i = 0; i < stimuli_.size(); ++i)
      if (stimuli_[i].time <= end) schedule(stimuli_[i].time, EventKind::StimulusChange, i);
    schedule(end, EventKind::Stop);

    while (!queue_.empty()) {
      const Event e = queue_.top();
      queue_.pop();
      now_ = e.time;
      ++result_.events_processed;
      switch (e.kind) {
        case EventKind::InjectFault: inject(faults_[e.payload], e.time); break;
        case EventKind::Evaluate: evaluate(e.time); break;
        case EventKind::Strobe: strobe(e.time); break;
        case EventKind::StimulusChange: apply_stimulus(stimuli_[e.payload], e.time); break;
        case EventKind::HealingStep: apply_step(steps_[e.payload], e.time); break;
        case EventKind::Stop: result_.reached_stop = true; break;
      }
      if (result_.reached_stop) break;
    }
    result_.health = fabric_.health_map();
    result_.alarm = fabric_.alarm();
    return std::move(result_);
  }

  const Fabric& fabric() const noexcept { return fabric_; }

 private:
  void schedule(Nanos t, EventKind k, std::size_t payload = 0) {
    if (t < now_) throw Error("event scheduled in the past");
    queue_.push({t, next_seq_++, k, payload});
  }

  std::uint32_t signal(const std::string& name) { return result_.trace.intern(name); }

  void record_alarm(Nanos t) {
    if (fabric_.alarm() == last_alarm_) return;
    last_alarm_ = fabric_.alarm();
    result_.trace.add(t, alarm_sig_, static_cast<std::int32_t>(last_alarm_), Annotation::Alarm);
    if (last_alarm_ == Alarm::FailSafe && result_.fail_safe_time < 0) result_.fail_safe_time = t;
  }

  void inject(const FaultSpec& f, Nanos t) {
    const CellId id = *f.cell;
    auto& c = fabric_.cell(id);
    InjectionRecord rec{f.kind, id, f.port, f.replica, t, false};
    std::string sig = to_string(id);
    if (c.health != CellHealth::FaultyDeactivated) {
      rec.applied = true;
      if (f.kind == FaultKind::PermanentGfb) {
        c.injected_permanent = StuckBehavior{f.stuck_value, f.flip_mask};
      } else {
        const auto& port = c.registers.port(f.port);
        const Value old = port.replicas[f.replica];
        const Value bad = f.stuck_value ? Value::of(old.width, *f.stuck_value) : old.flipped(f.flip_mask);
        c.registers.corrupt(f.port, f.replica, bad);
        sig += "." + std::string(to_string(f.port)) + "." + std::to_string(f.replica);
      }
    }
    result_.injections.push_back(rec);
    const std::int32_t code = !rec.applied ? 0 : f.kind == FaultKind::PermanentGfb ? 2 : 1;
    result_.trace.add(t, signal(sig), code, Annotation::Injection);
  }

  void on_permanent(CellId id, Nanos t) {
    HealthSyndrome s;
    s.cell_id = id;
    s.fault_kind = FaultClass::Permanent;
    s.detect_time = t;
    s.function = fabric_.function_of(id);
    const auto steps = heal(fabric_, s, scenario_.timing);
    result_.trace.add(t, signal(to_string(id)), static_cast<std::int32_t>(HealAction::Deactivate),
                      Annotation::SyndromeAction);
    for (const auto& st : steps) {
      steps_.push_back(st);
      schedule(st.time, EventKind::HealingStep, steps_.size() - 1);
    }
    result_.syndromes.push_back(std::move(s));
    record_alarm(t);
  }

  void evaluate(Nanos t) {
    const unsigned k = scenario_.timing.threshold;
    for (auto& layer : fabric_.layers()) {
      for (auto* bank : {&layer.f_cells, &layer.r_cells}) {
        for (auto& c : *bank) {
          if (!c.evaluating()) continue;
          const auto r = cell_step(c, t);
          for (unsigned i = 0; i < 4; ++i) {
            if (!c.config.selectors[i].used()) continue;
            const auto& v = r.votes[i];
            if (!v.masked() && !v.disagreement()) continue;
            const auto name = to_string(c.id) + "." + std::string(to_string(kPorts[i]));
            result_.trace.add(t, signal(name), v.mismatch_mask,
                              v.masked() ? Annotation::MaskedTransient : Annotation::Mismatch);
          }
          if (!r.checked) continue;
          const auto cls = classify(c.history, k);
          if (r.check == CheckResult::Mismatch) {
            c.health = CellHealth::SuspectTransient;
            result_.trace.add(t, signal(to_string(c.id)), static_cast<std::int32_t>(c.history.mismatch_streak),
                              Annotation::Mismatch);
            if (cls == FaultClass::Permanent) on_permanent(c.id, t);
          } else if (cls == FaultClass::Transient) {
            c.health = c.id.kind == CellKind::F ? CellHealth::Healthy : CellHealth::SpareActive;
            HealthSyndrome s;
            s.cell_id = c.id;
            s.fault_kind = FaultClass::Transient;
            s.detect_time = t;
            s.function = fabric_.function_of(c.id);
            result_.syndromes.push_back(std::move(s));
          }
        }
      }
    }

    const bool safe = fabric_.alarm() == Alarm::FailSafe;
    for (std::size_t o = 0; o < fabric_.outputs().size(); ++o) {
      const unsigned f = fabric_.outputs()[o].second;
      if (!fabric_.function_valid(f)) continue;
      const std::int32_t v = safe ? 0 : fabric_.function_output(f).payload;
      result_.trace.add(t, output_sig_[o], v, Annotation::Data);
      result_.first_valid.try_emplace(fabric_.outputs()[o].first, t);
    }

    latch_all(t);
  }

  void latch_all(Nanos t) {
    for (auto& layer : fabric_.layers())
      for (auto* bank : {&layer.f_cells, &layer.r_cells})
        for (auto& c : *bank)
          if (fabric_.clocked(c)) fabric_.latch(c, t);
  }

  std::int32_t output_value(const std::string& name) const {
    for (const auto& [n, f] : fabric_.outputs()) {
      if (n != name) continue;
      if (fabric_.alarm() == Alarm::FailSafe || !fabric_.function_valid(f)) return 0;
      return fabric_.function_output(f).payload;
    }
    return 0;
  }

  void strobe(Nanos t) {
    for (auto& layer : fabric_.layers())
      for (auto* bank : {&layer.f_cells, &layer.r_cells})
        for (auto& c : *bank)
          if (c.evaluating() && c.config.opcode == Opcode::Delay) c.gfb_state = c.pending_state;
    if (const auto& p = scenario_.plant) {
      const auto i = *scenario_.netlist.find_input(p->feedback);
      const auto v = static_cast<std::int16_t>(fabric_.input(i).payload);
      const auto u = static_cast<std::int16_t>(wrap16(output_value(p->drive)));
      stimuli_.push_back({t, p->feedback, plant_step(v, u, p->params)});
      schedule(t, EventKind::StimulusChange, stimuli_.size() - 1);
    }
  }

  void apply_stimulus(const StimulusChange& s, Nanos t) {
    const auto i = *scenario_.netlist.find_input(s.name);
    fabric_.set_input(i, Value::of(scenario_.netlist.inputs[i].width, s.value));
    result_.trace.add(t, input_sig_[i], fabric_.input(i).payload, Annotation::Data);
    latch_all(t);
  }

  void apply_step(const HealingStep& st, Nanos t) {
    fabric_.apply(st, t);
    result_.trace.add(t, signal(to_string(st.spare)), static_cast<std::int32_t>(st.action),
                      Annotation::SyndromeAction);
    if (st.action == HealAction::Restore) result_.restore_times.push_back(t);
    record_alarm(t);
  }

  Scenario scenario_;
  Fabric fabric_;
  std::vector<FaultSpec> faults_;
  std::vector<StimulusChange> stimuli_;
  std::vector<HealingStep> steps_;
  std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
  std::uint64_t next_seq_ = 0;
  Nanos now_ = 0;
  SimulationResult result_;
  std::vector<std::uint32_t> input_sig_;
  std::vector<std::uint32_t> output_sig_;
  std::uint32_t alarm_sig_ = 0;
  Alarm last_alarm_ = Alarm::None;
};

inline SimulationResult simulate(const Scenario& s) { return Simulator(s).run(); }

// ---------------------------------------------------------------------------
// Trace queries
// ---------------------------------------------------------------------------

struct SteadyStateReport {
  std::vector<std::string> mismatches;  // outputs whose last sample differs (or is missing)

  bool ok() const noexcept { return mismatches.empty(); }
};

// Compares the last data sample at or after `t_from` of every primary output.
inline SteadyStateReport compare_steady_state(const Trace& trace, const std::map<std::string, std::int32_t>& oracle,
                                              Nanos t_from) {
  SteadyStateReport rep;
  for (const auto& [name, expected] : oracle) {
    std::optional<std::int32_t> last;
    for (const auto& r : trace.samples(name))
      if (r.time >= t_from) last = r.value;
    if (!last || *last != expected) rep.mismatches.push_back(name);
  }
  return rep;
}

// Value of every primary output at the latest data sample <= t.
inline std::map<std::string, std::int32_t> outputs_at(const Trace& trace, Nanos t) {
  std::map<std::string, std::int32_t> out;
  for (const auto& name : trace.output_names()) {
    for (const auto& r : trace.samples(name)) {
      if (r.time > t) break;
      out[name] = r.value;
    }
  }
  return out;
}

}  // namespace selfheal
