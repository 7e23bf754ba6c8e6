#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selfheal/netlist.hpp"
#include "selfheal/placement.hpp"

namespace selfheal {

// ---------------------------------------------------------------------------
// Q8.8 fixed point
// ---------------------------------------------------------------------------

struct Q8_8 {
  std::int16_t raw = 0;

  static constexpr Q8_8 from_raw(std::int16_t r) noexcept { return {r}; }

  // Rejects values that are not exactly representable.
  static Q8_8 from_double(double v) {
    const double scaled = v * 256.0;
    if (scaled < -32768.0 || scaled > 32767.0 || std::nearbyint(scaled) != scaled)
      throw ConfigError("value " + std::to_string(v) + " is not representable in Q8.8");
    return {static_cast<std::int16_t>(scaled)};
  }

  constexpr double to_double() const noexcept { return raw / 256.0; }

  friend constexpr bool operator==(const Q8_8&, const Q8_8&) = default;
};

// ---------------------------------------------------------------------------
// Emergency diesel generator start logic
// ---------------------------------------------------------------------------

// 14 inputs, 14 AND/OR/NOT nodes, depth 7, two outputs. Boolean equations:
//
//   bus_trouble   = loss_of_offsite_power | bus_undervoltage | degraded_grid_voltage
//   auto_remote   = bus_trouble & !local_control
//   start_demand  = auto_remote | safety_injection | manual_start | remote_start
//   hard_trip     = emergency_stop | lockout_relay | overspeed_trip
//   soft_trip     = low_lube_oil_pressure | high_jacket_water_temp
//   trips_ok      = !soft_trip | start_demand       (emergency start bypasses soft trips)
//   permissive    = start_demand & trips_ok & !hard_trip
//   run_ok        = permissive & fuel_oil_level_ok
//   EngineStart              = run_ok & starting_air_pressure_ok
//   OpenAirStartFuel_Valves  = run_ok & !hard_trip
inline constexpr std::string_view kEdgNetlist = R"(# Emergency diesel generator start logic
input loss_of_offsite_power : bit
input bus_undervoltage : bit
input degraded_grid_voltage : bit
input safety_injection : bit
input manual_start : bit
input remote_start : bit
input local_control : bit
input emergency_stop : bit
input lockout_relay : bit
input overspeed_trip : bit
input low_lube_oil_pressure : bit
input high_jacket_water_temp : bit
input fuel_oil_level_ok : bit
input starting_air_pressure_ok : bit

node bus_trouble = OR(loss_of_offsite_power, bus_undervoltage, degraded_grid_voltage)
node direct_demand = OR(safety_injection, manual_start, remote_start)
node not_local = NOT(local_control)
node hard_trip = OR(emergency_stop, lockout_relay, overspeed_trip)
node soft_trip = OR(low_lube_oil_pressure, high_jacket_water_temp)
node auto_remote = AND(bus_trouble, not_local)
node soft_clear = NOT(soft_trip)
node no_hard_trip = NOT(hard_trip)
node start_demand = OR(auto_remote, direct_demand)
node trips_ok = OR(soft_clear, start_demand)
node permissive = AND(start_demand, trips_ok, no_hard_trip)
node run_ok = AND(permissive, fuel_oil_level_ok)
node engine_start = AND(run_ok, starting_air_pressure_ok)
node valves_open = AND(run_ok, no_hard_trip)

output EngineStart = engine_start
output OpenAirStartFuel_Valves = valves_open
)";

struct EdgApplication {
  Netlist netlist;
};

inline EdgApplication build_edg() { return {parse_netlist(kEdgNetlist, "edg")}; }

// Straight-line evaluation of the documented equations, independent of the
// netlist text. Inputs are in netlist declaration order.
inline std::array<int, 2> edg_equations(const std::array<int, 14>& x) {
  const bool loop = x[0], uv = x[1], dv = x[2], si = x[3], manual = x[4], remote = x[5], local = x[6];
  const bool estop = x[7], lockout = x[8], overspeed = x[9], lube = x[10], jacket = x[11], fuel = x[12], air = x[13];
  const bool bus_trouble = loop || uv || dv;
  const bool start_demand = (bus_trouble && !local) || si || manual || remote;
  const bool hard_trip = estop || lockout || overspeed;
  const bool trips_ok = !(lube || jacket) || start_demand;
  const bool run_ok = start_demand && trips_ok && !hard_trip && fuel;
  return {run_ok && air ? 1 : 0, run_ok && !hard_trip ? 1 : 0};
}

// ---------------------------------------------------------------------------
// Cruise control
// ---------------------------------------------------------------------------

struct PiParams {
  Q8_8 kp = Q8_8::from_raw(128);  // 0.5
  Q8_8 ki = Q8_8::from_raw(64);   // 0.25
  std::int16_t u_min = -32768;    // the CCS datapath clamps the upper bound only
  std::int16_t u_max = 100;

  void validate() const {
    if (u_min > u_max) throw ConfigError("PI saturation bounds: u_min > u_max");
  }
};

struct PlantParams {
  Q8_8 gain = Q8_8::from_raw(256);  // 1.0
  Q8_8 drag = Q8_8::from_raw(64);   // 0.25
  Q8_8 dt = Q8_8::from_raw(64);     // 0.25

  void validate() const {
    if (drag.raw < 0) throw ConfigError("plant drag must be >= 0");
  }
};

enum class CcsCondition { Set, Decrement, Increment, CancelBrake };

inline std::int16_t ccs_mode(CcsCondition cond, std::int16_t target, std::int16_t actual) noexcept {
  switch (cond) {
    case CcsCondition::Set: return actual;
    case CcsCondition::Decrement: return static_cast<std::int16_t>(wrap16(std::int32_t{target} - 1));
    case CcsCondition::Increment: return static_cast<std::int16_t>(wrap16(std::int32_t{target} + 1));
    case CcsCondition::CancelBrake: return 0;
  }
  return target;
}

// Positional PI in Q8.8 with per-term truncation (floor), 16-bit wrap and
// conditional integration: the integrator holds while the output saturates.
inline std::vector<std::int16_t> pi_reference(const PiParams& p, const std::vector<std::int16_t>& errors) {
  p.validate();
  std::vector<std::int16_t> out;
  out.reserve(errors.size());
  std::int32_t integrator = 0;
  for (const auto e : errors) {
    const std::int32_t acc = wrap16(integrator + e);
    const std::int32_t prop = wrap16((std::int64_t{e} * p.kp.raw) >> 8);
    const std::int32_t integ = wrap16((std::int64_t{acc} * p.ki.raw) >> 8);
    const std::int32_t raw = wrap16(prop + integ);
    std::int32_t u = raw;
    bool saturated = false;
    if (raw > p.u_max) {
      u = p.u_max;
      saturated = true;
    } else if (raw < p.u_min) {
      u = p.u_min;
      saturated = true;
    }
    if (!saturated) integrator = acc;
    out.push_back(static_cast<std::int16_t>(u));
  }
  return out;
}

// v' = v + (gain*u - drag*v)*dt, Q8.8 products, floor-truncated.
inline std::int16_t plant_step(std::int16_t v, std::int16_t u, const PlantParams& pp) noexcept {
  const std::int64_t force = std::int64_t{pp.gain.raw} * u - std::int64_t{pp.drag.raw} * v;  // Q8.8
  const std::int64_t delta = (force * pp.dt.raw) >> 16;                                       // Q16.16 -> int
  return static_cast<std::int16_t>(wrap16(v + delta));
}

struct CcsApplication {
  Netlist netlist;
  PiParams pi;
};

// Wiring. FC1..FC11 hold the mode logic and the output clamp, FC12..FC17
// the PI datapath:
//   FC4  cb        = cancel | brake
//   FC1  ncb       = !cb                          (output `active`)
//   FC3  target'   = DELAY(FC7)
//   FC2            = target' + increment
//   FC6            = FC2 - decrement
//   FC5            = set ? actual_speed : FC6
//   FC7  target    = ncb ? FC5 : 0
//   FC11 e         = target - actual_speed
//   FC13 p         = e * Kp
//   FC9  integ'    = DELAY(FC10)
//   FC17 acc       = integ' + e
//   FC12 i         = acc * Ki
//   FC14 u_raw     = p + i
//   FC15 nsat      = u_max >= u_raw
//   FC8  throttle  = nsat ? u_raw : u_max
//   FC16 e_gated   = e * nsat                    (integrator holds when saturated)
//   FC10 integ     = integ' + e_gated
inline std::string ccs_netlist_text(const PiParams& p = {}) {
  p.validate();
  std::ostringstream os;
  os << "# Cruise control: mode logic (Task1) and PI controller (Task2)\n"
        "# partition task1: FC1, FC2, FC3, FC4, FC5, FC6, FC7, FC8, FC9, FC10, FC11\n"
        "# partition task2: FC12, FC13, FC14, FC15, FC16, FC17\n"
        "input set : bit\n"
        "input increment : bit\n"
        "input decrement : bit\n"
        "input cancel : bit\n"
        "input brake : bit\n"
        "input actual_speed : int16\n"
        "\n"
        "node FC1 = NOT(FC4)\n"
        "node FC2 = ADD(FC3, increment)\n"
        "node FC3 = DELAY(FC7) delay=1\n"
        "node FC4 = OR(cancel, brake)\n"
        "node FC5 = MUX(set, FC6, actual_speed)\n"
        "node FC6 = SUB(FC2, decrement)\n"
        "node FC7 = MUX(FC1, imm, FC5) imm=0\n"
     << "node FC8 = MUX(FC15, imm, FC14) imm=" << p.u_max << "\n"
     << "node FC9 = DELAY(FC10) delay=1\n"
        "node FC10 = ADD(FC9, FC16)\n"
        "node FC11 = SUB(FC7, actual_speed)\n"
     << "node FC12 = MUL(FC17, imm) imm=" << p.ki.raw << "\n"
     << "node FC13 = MUL(FC11, imm) imm=" << p.kp.raw << "\n"
     << "node FC14 = ADD(FC13, FC12)\n"
     << "node FC15 = CMP(imm, FC14) imm=" << p.u_max << "\n"
     << "node FC16 = MUL(FC11, FC15)\n"
        "node FC17 = ADD(FC9, FC11)\n"
        "\n"
        "output throttle = FC8\n"
        "output active = FC1\n";
  return os.str();
}

inline CcsApplication build_ccs(const PiParams& p = {}) {
  if (p.u_min != -32768)
    throw ConfigError("the CCS datapath has a single comparator and realizes the upper bound only; u_min must be -32768");
  return {parse_netlist(ccs_netlist_text(p), "ccs"), p};
}

struct BundledApplication {
  std::string_view name;
  std::string_view description;
};

inline constexpr BundledApplication kBundledApplications[] = {
    {"edg", "emergency diesel generator start logic, 14 inputs, 14 cells, 2 outputs"},
    {"ccs", "cruise control mode logic and PI controller, 6 inputs, 17 cells over 5 layers, 2 outputs"},
};

// Netlist for a bundled application name, or nullopt.
inline std::optional<Netlist> bundled_netlist(std::string_view name) {
  if (name == "edg") return build_edg().netlist;
  if (name == "ccs") return build_ccs().netlist;
  return std::nullopt;
}

inline std::optional<std::string> bundled_netlist_text(std::string_view name) {
  if (name == "edg") return std::string(kEdgNetlist);
  if (name == "ccs") return ccs_netlist_text();
  return std::nullopt;
}

}  // namespace selfheal
