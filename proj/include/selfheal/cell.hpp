#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "selfheal/genetic_code.hpp"
#include "selfheal/value.hpp"

namespace selfheal {

// ---------------------------------------------------------------------------
// Hybrid redundancy: triplicated registers and the majority voter
// ---------------------------------------------------------------------------

struct VoteResult {
  Value value;
  std::uint8_t mismatch_mask = 0;  // bit i set when replica i dissents

  bool masked() const noexcept { return mismatch_mask != 0 && mismatch_mask != 0b111; }
  bool disagreement() const noexcept { return mismatch_mask == 0b111; }
};

// Word-level 2-of-3 majority. With no majority, replica 0 wins and all three
// replicas are flagged.
inline VoteResult vote(const std::array<Value, 3>& r) noexcept {
  if (r[0] == r[1]) return {r[0], static_cast<std::uint8_t>(r[2] == r[0] ? 0b000 : 0b100)};
  if (r[0] == r[2]) return {r[0], 0b010};
  if (r[1] == r[2]) return {r[1], 0b001};
  return {r[0], 0b111};
}

struct RegisterPort {
  std::array<Value, 3> replicas{};
  Nanos last_write = -1;
  bool valid = false;
};

class InputRegisterBank {
 public:
  void write(Port p, Value v, Nanos t, bool valid = true) noexcept {
    auto& port = ports_[static_cast<unsigned>(p)];
    port.replicas = {v, v, v};
    port.last_write = t;
    port.valid = valid;
  }

  // Replaces one replica only; the other two keep their value.
  void corrupt(Port p, unsigned replica, Value v) {
    if (replica > 2) throw ConfigError("replica index must be 0, 1 or 2");
    ports_[static_cast<unsigned>(p)].replicas[replica] = v;
  }

  const RegisterPort& port(Port p) const noexcept { return ports_[static_cast<unsigned>(p)]; }

  void clear() noexcept { ports_ = {}; }

 private:
  std::array<RegisterPort, 4> ports_{};
};

// ---------------------------------------------------------------------------
// Generic function block
// ---------------------------------------------------------------------------

using PortValues = std::array<Value, 4>;

struct GfbState {
  std::vector<Value> pipeline;  // DELAY stages, index 0 is the newest

  friend bool operator==(const GfbState&, const GfbState&) = default;
};

inline GfbState initial_state(const CellConfig& c) {
  GfbState s;
  s.pipeline.assign(c.opcode == Opcode::Delay ? c.delay_cycles : 0, Value::of(c.width, 0));
  return s;
}

struct GfbResult {
  Value output;
  GfbState state;
};

// Evaluates one generic function block. `used_ports` selects which ports
// participate in the n-ary AND; other operators treat unused ports as 0.
//
// MUL is a Q8.8 gain product: N is an integer, W is the gain in Q8.8 (a BIT
// gain promotes to 0.0 / 1.0), result = (N * W) >> 8.
inline GfbResult gfb_eval(Opcode op, const PortValues& in, Value immediate, const GfbState& state,
                          WidthMode width, unsigned used_ports = 0b1111) {
  (void)immediate;
  const auto& n = in[0];
  const auto& w = in[1];
  const auto& e = in[2];
  const auto& s = in[3];
  GfbResult r{Value::of(width, 0), state};
  switch (op) {
    case Opcode::Nop:
      break;
    case Opcode::And: {
      std::int64_t acc = width == WidthMode::Bit ? 1 : -1;
      bool any = false;
      for (unsigned i = 0; i < 4; ++i) {
        if ((used_ports >> i) & 1u) {
          acc &= in[i].payload;
          any = true;
        }
      }
      r.output = Value::of(width, any ? acc : 0);
      break;
    }
    case Opcode::Or:
      r.output = Value::of(width, n.payload | w.payload | e.payload | s.payload);
      break;
    case Opcode::Not:
      r.output = Value::of(width, ~n.payload);
      break;
    case Opcode::Add:
      r.output = Value::of(width, std::int64_t{n.payload} + w.payload + e.payload + s.payload);
      break;
    case Opcode::Sub:
      r.output = Value::of(width, std::int64_t{n.payload} - w.payload);
      break;
    case Opcode::Mul: {
      const std::int64_t gain = w.width == WidthMode::Bit ? std::int64_t{w.payload} * 256 : w.payload;
      r.output = Value::of(width, (std::int64_t{n.payload} * gain) >> 8);
      break;
    }
    case Opcode::Cmp:
      r.output = Value::bit(n.payload >= w.payload ? 1 : 0);
      break;
    case Opcode::Mux:
      r.output = Value::of(width, n.payload == 0 ? w.payload : e.payload);
      break;
    case Opcode::Delay:
      if (!state.pipeline.empty()) {
        r.output = Value::of(width, state.pipeline.back().payload);
        for (std::size_t i = r.state.pipeline.size() - 1; i > 0; --i) r.state.pipeline[i] = r.state.pipeline[i - 1];
        r.state.pipeline[0] = Value::of(width, n.payload);
      }
      break;
  }
  return r;
}

inline GfbResult gfb_eval(const CellConfig& c, const PortValues& in, const GfbState& state) {
  return gfb_eval(c.opcode, in, Value::of(c.width, c.immediate), state, c.width, c.used_port_mask());
}

// ---------------------------------------------------------------------------
// Self-checking and classification
// ---------------------------------------------------------------------------

// Persistent misbehavior of the primary evaluation path.
struct StuckBehavior {
  std::optional<std::int32_t> stuck_value;  // output forced to this value
  std::int32_t flip_mask = 0;               // otherwise XORed into the output

  Value apply(Value v) const noexcept {
    if (stuck_value) return Value::of(v.width, *stuck_value);
    return v.flipped(flip_mask);
  }
};

enum class CheckResult { Clean, Mismatch };

struct FaultHistory {
  unsigned mismatch_streak = 0;
  unsigned previous_streak = 0;  // streak as it stood before the latest check
  Nanos last_check_time = -1;
  bool last_check_clean = true;

  void record(CheckResult r, Nanos t) noexcept {
    previous_streak = mismatch_streak;
    last_check_time = t;
    last_check_clean = r == CheckResult::Clean;
    mismatch_streak = last_check_clean ? 0 : mismatch_streak + 1;
  }
};

enum class FaultClass { Transient, Permanent, Undetermined };

inline std::string_view to_string(FaultClass c) noexcept {
  switch (c) {
    case FaultClass::Transient: return "transient";
    case FaultClass::Permanent: return "permanent";
    case FaultClass::Undetermined: return "undetermined";
  }
  return "?";
}

// Persistence rule: K consecutive mismatches make a fault permanent. A run of
// mismatches that ends with a clean check was transient. A clean history with
// no preceding mismatches is reported as Undetermined (nothing to classify).
inline FaultClass classify(const FaultHistory& h, unsigned k) noexcept {
  if (k == 0) k = 1;
  if (!h.last_check_clean) return h.mismatch_streak >= k ? FaultClass::Permanent : FaultClass::Undetermined;
  return h.previous_streak >= 1 ? FaultClass::Transient : FaultClass::Undetermined;
}

struct SelfCheck {
  Value primary;
  Value checker;
  GfbState next_state;
  CheckResult result;
};

// Duplication with comparison: the stuck behavior only reaches the primary path.
inline SelfCheck self_check(const CellConfig& c, const PortValues& voted, const GfbState& state,
                            const std::optional<StuckBehavior>& stuck) {
  const auto golden = gfb_eval(c, voted, state);
  const Value primary = stuck ? stuck->apply(golden.output) : golden.output;
  return {primary, golden.output, golden.state,
          primary == golden.output ? CheckResult::Clean : CheckResult::Mismatch};
}

// ---------------------------------------------------------------------------
// Functional cell
// ---------------------------------------------------------------------------

enum class CellKind : std::uint8_t { F, R };

struct CellId {
  unsigned layer = 0;
  unsigned slot = 0;
  CellKind kind = CellKind::F;

  friend constexpr bool operator==(const CellId&, const CellId&) = default;
  friend constexpr auto operator<=>(const CellId&, const CellId&) = default;
};

inline std::string to_string(const CellId& id) {
  return "L" + std::to_string(id.layer) + "." + (id.kind == CellKind::F ? "F" : "R") + std::to_string(id.slot);
}

// Parses "L<layer>.<F|R><slot>".
inline std::optional<CellId> parse_cell_id(std::string_view s) {
  if (s.size() < 5 || s[0] != 'L') return std::nullopt;
  const auto dot = s.find('.');
  if (dot == std::string_view::npos || dot < 2 || dot + 2 >= s.size()) return std::nullopt;
  auto digits = [](std::string_view d, unsigned& out) {
    if (d.empty() || d.size() > 4) return false;
    unsigned v = 0;
    for (char c : d) {
      if (c < '0' || c > '9') return false;
      v = v * 10 + static_cast<unsigned>(c - '0');
    }
    out = v;
    return true;
  };
  CellId id;
  if (!digits(s.substr(1, dot - 1), id.layer)) return std::nullopt;
  const char k = s[dot + 1];
  if (k != 'F' && k != 'R') return std::nullopt;
  id.kind = k == 'F' ? CellKind::F : CellKind::R;
  if (!digits(s.substr(dot + 2), id.slot) || id.slot > 3) return std::nullopt;
  return id;
}

enum class CellHealth { Healthy, SuspectTransient, FaultyDeactivated, SpareIdle, SpareActive };

inline std::string_view to_string(CellHealth h) noexcept {
  switch (h) {
    case CellHealth::Healthy: return "healthy";
    case CellHealth::SuspectTransient: return "suspect";
    case CellHealth::FaultyDeactivated: return "deactivated";
    case CellHealth::SpareIdle: return "spare-idle";
    case CellHealth::SpareActive: return "spare-active";
  }
  return "?";
}

struct FunctionalCell {
  CellId id;
  CellConfig config;
  GeneticCode code;  // configuration memory
  bool configured = false;
  InputRegisterBank registers;
  GfbState gfb_state;
  GfbState pending_state;  // committed on the sample strobe
  CellHealth health = CellHealth::Healthy;
  FaultHistory history;
  std::optional<StuckBehavior> injected_permanent;
  Value output;
  bool output_valid = false;

  static FunctionalCell make(CellId id) {
    FunctionalCell c;
    c.id = id;
    c.health = id.kind == CellKind::R ? CellHealth::SpareIdle : CellHealth::Healthy;
    return c;
  }

  void load(const CellConfig& cfg) {
    config = cfg;
    code = encode_genetic(cfg);
    configured = true;
    gfb_state = initial_state(cfg);
    pending_state = gfb_state;
  }

  bool evaluating() const noexcept {
    if (!configured) return false;
    if (id.kind == CellKind::F) return health == CellHealth::Healthy || health == CellHealth::SuspectTransient;
    return health == CellHealth::SpareActive || health == CellHealth::SuspectTransient;
  }

  void deactivate() noexcept {
    health = CellHealth::FaultyDeactivated;
    output = Value::of(config.width, 0);
    output_valid = true;
  }
};

struct StepResult {
  Value output;
  bool valid = false;
  CheckResult check = CheckResult::Clean;
  std::array<VoteResult, 4> votes{};
  bool checked = false;
};

// Votes every used port, evaluates both paths and updates the fault history.
// Pending DELAY state is stored on the cell and committed by the caller.
inline StepResult cell_step(FunctionalCell& cell, Nanos t) {
  StepResult r;
  PortValues voted{};
  bool inputs_valid = true;
  for (unsigned i = 0; i < 4; ++i) {
    const auto& sel = cell.config.selectors[i];
    const auto& port = cell.registers.port(kPorts[i]);
    r.votes[i] = vote(port.replicas);
    voted[i] = r.votes[i].value;
    if (sel.used() && !port.valid) inputs_valid = false;
  }
  const auto sc = self_check(cell.config, voted, cell.gfb_state, cell.injected_permanent);
  const bool stateful = cell.config.opcode == Opcode::Delay;
  r.valid = inputs_valid || stateful;
  r.output = cell.config.output_enable ? sc.primary : Value::of(cell.config.width, 0);
  cell.pending_state = sc.next_state;
  if (r.valid) {
    r.check = sc.result;
    r.checked = true;
    cell.history.record(sc.result, t);
  }
  cell.output = r.output;
  cell.output_valid = r.valid;
  return r;
}

}  // namespace selfheal
