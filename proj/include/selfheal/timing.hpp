#pragma once

#include <sstream>
#include <string>

#include "selfheal/value.hpp"

namespace selfheal {

// Defaults are the calibration set: the bundled EDG netlist has depth 7, so
// 7 * 35ns = 245ns fault-free latency.
struct TimingParams {
  Nanos cell_delay = 35;
  unsigned threshold = 2;  // K consecutive mismatches => permanent
  Nanos reroute_delay = 35;
  Nanos restore_delay = 35;
  Nanos stimulus_period = 560;

  void validate() const {
    if (cell_delay <= 0) throw ConfigError("timing.cell_delay must be > 0");
    if (threshold < 1) throw ConfigError("timing.threshold must be >= 1");
    if (reroute_delay <= 0) throw ConfigError("timing.reroute_delay must be > 0");
    if (restore_delay <= 0) throw ConfigError("timing.restore_delay must be > 0");
    if (stimulus_period <= 0) throw ConfigError("timing.stimulus_period must be > 0");
  }

  std::string describe() const {
    std::ostringstream os;
    os << "cell_delay=" << cell_delay << "ns threshold=" << threshold << " reroute_delay=" << reroute_delay
       << "ns restore_delay=" << restore_delay << "ns stimulus_period=" << stimulus_period << "ns";
    return os.str();
  }

  friend bool operator==(const TimingParams&, const TimingParams&) = default;
};

}  // namespace selfheal
