#pragma once

#include <algorithm>
#include <bitset>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "selfheal/engine.hpp"
#include "selfheal/trace.hpp"

namespace selfheal {

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCsvHeader = "time_ns,signal,value,annotation";

struct CsvOptions {
  bool header_comments = false;  // scenario, timing, version and signal table as `#` lines
};

inline std::string to_csv(const Trace& t, const CsvOptions& opt = {}) {
  std::ostringstream os;
  if (opt.header_comments) {
    os << "# scenario=" << t.scenario << '\n';
    os << "# timing " << t.timing.describe() << '\n';
    os << "# version=" << kToolVersion << '\n';
    for (const auto& s : t.signals)
      os << "# signal " << s.name << ' ' << to_string(s.width) << ' '
         << (s.role == SignalRole::PrimaryInput ? "input" : s.role == SignalRole::PrimaryOutput ? "output" : "internal")
         << '\n';
  }
  os << kCsvHeader << '\n';
  for (const auto& r : t.records)
    os << r.time << ',' << t.name_of(r.signal) << ',' << r.value << ',' << to_string(r.annotation) << '\n';
  return os.str();
}

inline Trace parse_csv(std::string_view text) {
  Trace t;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string kw, name, width, role;
      ls >> kw;
      if (kw == "signal" && (ls >> name >> width >> role))
        t.intern(name, parse_width(width).value_or(WidthMode::Bit),
                 role == "input" ? SignalRole::PrimaryInput
                                 : role == "output" ? SignalRole::PrimaryOutput : SignalRole::Internal);
      else if (kw.rfind("scenario=", 0) == 0)
        t.scenario = kw.substr(9);
      continue;
    }
    if (!header) {
      if (line != kCsvHeader) throw ConfigError("csv line " + std::to_string(lineno) + ": expected header row");
      header = true;
      continue;
    }
    const auto fields = detail::split(line, ',');
    if (fields.size() != 4) throw ConfigError("csv line " + std::to_string(lineno) + ": expected 4 fields");
    const auto time = detail::parse_int<std::int64_t>(fields[0]);
    const auto value = detail::parse_int<std::int64_t>(fields[2]);
    if (!time || !value) throw ConfigError("csv line " + std::to_string(lineno) + ": bad number");
    t.add(*time, t.intern(fields[1]), static_cast<std::int32_t>(*value), parse_annotation(fields[3]));
  }
  if (!header) throw ConfigError("csv: missing header row");
  return t;
}

// ---------------------------------------------------------------------------
// VCD
// ---------------------------------------------------------------------------

namespace detail {

inline std::string vcd_id(std::size_t n) {
  std::string id;
  do {
    id.push_back(static_cast<char>('!' + n % 94));
    n /= 94;
  } while (n > 0);
  return id;
}

inline std::string vcd_value(WidthMode w, std::optional<std::int32_t> v, const std::string& id) {
  if (w == WidthMode::Bit) return (v ? std::string(1, (*v & 1) ? '1' : '0') : std::string("x")) + id;
  if (!v) return "bx " + id;
  return "b" + std::bitset<16>(static_cast<std::uint16_t>(*v)).to_string() + " " + id;
}

}  // namespace detail

// Data signals only (primary inputs and outputs), one $var each. A signal
// with no sample at t=0 starts as x.
inline std::string to_vcd(const Trace& t) {
  std::vector<std::uint32_t> vars;
  for (std::uint32_t i = 0; i < t.signals.size(); ++i)
    if (t.signals[i].role != SignalRole::Internal) vars.push_back(i);
  std::map<std::uint32_t, std::string> ids;
  for (std::size_t k = 0; k < vars.size(); ++k) ids[vars[k]] = detail::vcd_id(k);

  std::ostringstream os;
  os << "$version selfheal " << kToolVersion << " $end\n";
  os << "$comment scenario=" << t.scenario << ' ' << t.timing.describe() << " $end\n";
  os << "$timescale 1ns $end\n";
  os << "$scope module " << (t.scenario.empty() ? "top" : t.scenario) << " $end\n";
  for (auto i : vars)
    os << "$var wire " << (t.signals[i].width == WidthMode::Bit ? 1 : 16) << ' ' << ids[i] << ' ' << t.signals[i].name
       << " $end\n";
  os << "$upscope $end\n$enddefinitions $end\n";

  std::map<std::uint32_t, std::optional<std::int32_t>> current;
  for (auto i : vars) current[i] = std::nullopt;
  std::size_t r = 0;
  for (; r < t.records.size() && t.records[r].time == 0; ++r) {
    const auto& rec = t.records[r];
    if (rec.annotation == Annotation::Data && ids.count(rec.signal)) current[rec.signal] = rec.value;
  }
  os << "#0\n$dumpvars\n";
  for (auto i : vars) os << detail::vcd_value(t.signals[i].width, current[i], ids[i]) << '\n';
  os << "$end\n";

  Nanos stamped = 0;
  for (; r < t.records.size(); ++r) {
    const auto& rec = t.records[r];
    if (rec.annotation != Annotation::Data || !ids.count(rec.signal)) continue;
    if (current[rec.signal] == rec.value) continue;
    current[rec.signal] = rec.value;
    if (rec.time != stamped) {
      os << '#' << rec.time << '\n';
      stamped = rec.time;
    }
    os << detail::vcd_value(t.signals[rec.signal].width, rec.value, ids[rec.signal]) << '\n';
  }
  return os.str();
}

struct VcdChange {
  Nanos time = 0;
  std::string signal;
  std::optional<std::int32_t> value;  // nullopt for x

  friend bool operator==(const VcdChange&, const VcdChange&) = default;
};

struct VcdDump {
  std::string timescale;
  std::vector<SignalInfo> vars;
  std::vector<VcdChange> changes;  // includes the initial $dumpvars entries at t=0
};

inline VcdDump parse_vcd(std::string_view text) {
  VcdDump d;
  std::istringstream in{std::string(text)};
  std::map<std::string, std::size_t> by_id;
  std::string tok;
  Nanos now = 0;
  bool defs_done = false;
  auto decode = [&](const std::string& bits, WidthMode w) -> std::optional<std::int32_t> {
    if (bits.find_first_of("xXzZ") != std::string::npos) return std::nullopt;
    std::int64_t v = 0;
    for (char c : bits) v = v * 2 + (c == '1');
    return w == WidthMode::Bit ? static_cast<std::int32_t>(v & 1) : wrap16(v);
  };
  auto skip_to_end = [&] {
    std::string s;
    while (in >> s && s != "$end") {}
  };
  while (in >> tok) {
    if (tok == "$timescale") {
      std::string s;
      while (in >> s && s != "$end") d.timescale += s;
    } else if (tok == "$var") {
      std::string type, id, name;
      unsigned width = 0;
      in >> type >> width >> id >> name;
      skip_to_end();
      by_id[id] = d.vars.size();
      d.vars.push_back({name, width == 1 ? WidthMode::Bit : WidthMode::Int16, SignalRole::Internal});
    } else if (tok == "$enddefinitions") {
      skip_to_end();
      defs_done = true;
    } else if (tok == "$dumpvars" || tok == "$end") {
      continue;
    } else if (tok[0] == '$') {
      skip_to_end();
    } else if (!defs_done) {
      throw ConfigError("vcd: unexpected token '" + tok + "' before $enddefinitions");
    } else if (tok[0] == '#') {
      const auto t = detail::parse_int<std::int64_t>(tok.substr(1));
      if (!t || *t < now) throw ConfigError("vcd: bad timestamp '" + tok + "'");
      now = *t;
    } else if (tok[0] == 'b' || tok[0] == 'B') {
      std::string id;
      in >> id;
      const auto it = by_id.find(id);
      if (it == by_id.end()) throw ConfigError("vcd: unknown identifier '" + id + "'");
      d.changes.push_back({now, d.vars[it->second].name, decode(tok.substr(1), d.vars[it->second].width)});
    } else {
      const auto it = by_id.find(tok.substr(1));
      if (it == by_id.end()) throw ConfigError("vcd: unknown identifier '" + tok.substr(1) + "'");
      d.changes.push_back({now, d.vars[it->second].name, decode(tok.substr(0, 1), WidthMode::Bit)});
    }
  }
  return d;
}

// The change list a VCD of `t` should carry: initial values at t=0, then every
// data sample that differs from the signal's previous value.
inline std::vector<VcdChange> expected_vcd_changes(const Trace& t) {
  std::vector<VcdChange> out;
  std::map<std::uint32_t, std::optional<std::int32_t>> current;
  for (std::uint32_t i = 0; i < t.signals.size(); ++i)
    if (t.signals[i].role != SignalRole::Internal) current[i] = std::nullopt;
  std::size_t r = 0;
  for (; r < t.records.size() && t.records[r].time == 0; ++r)
    if (t.records[r].annotation == Annotation::Data && current.count(t.records[r].signal))
      current[t.records[r].signal] = t.records[r].value;
  for (const auto& [i, v] : current) out.push_back({0, t.signals[i].name, v});
  for (; r < t.records.size(); ++r) {
    const auto& rec = t.records[r];
    if (rec.annotation != Annotation::Data || !current.count(rec.signal) || current[rec.signal] == rec.value) continue;
    current[rec.signal] = rec.value;
    out.push_back({rec.time, t.signals[rec.signal].name, rec.value});
  }
  return out;
}

// Primary-output data rows only, in CSV form. Two runs with identical output
// behavior render byte-identical text.
inline std::string output_view(const Trace& t) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& r : t.records)
    if (r.annotation == Annotation::Data && t.signals[r.signal].role == SignalRole::PrimaryOutput)
      os << r.time << ',' << t.name_of(r.signal) << ',' << r.value << ",data\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct SyndromeMetrics {
  CellId cell;
  FaultClass kind = FaultClass::Permanent;
  Nanos detect_time = 0;
  std::optional<Nanos> injection_time;
  std::optional<Nanos> detect_latency;
  std::optional<Nanos> restore_time;
  std::optional<Nanos> heal_latency;  // restore - injection
  bool escalated = false;
};

struct HealingMetrics {
  std::optional<Nanos> fault_free_latency;  // golden run: first time all outputs are valid
  std::optional<Nanos> first_valid;         // this run
  std::vector<SyndromeMetrics> syndromes;
  std::size_t faults_injected = 0;
  std::size_t faults_detected = 0;
  std::size_t faults_healed = 0;
  std::optional<std::size_t> erroneous_output_samples;
  std::optional<Nanos> last_restore;
  std::optional<Nanos> heal_complete;
  std::optional<double> heal_ratio;
  Alarm alarm = Alarm::None;
  std::optional<Nanos> fail_safe_time;

  friend bool operator==(const HealingMetrics&, const HealingMetrics&) = default;
};

inline bool operator==(const SyndromeMetrics& a, const SyndromeMetrics& b) {
  return a.cell == b.cell && a.kind == b.kind && a.detect_time == b.detect_time &&
         a.injection_time == b.injection_time && a.detect_latency == b.detect_latency &&
         a.restore_time == b.restore_time && a.heal_latency == b.heal_latency && a.escalated == b.escalated;
}

namespace detail {

inline std::optional<Nanos> all_outputs_valid(const SimulationResult& r) {
  const auto names = r.trace.output_names();
  if (names.empty()) return std::nullopt;
  Nanos t = 0;
  for (const auto& n : names) {
    auto it = r.first_valid.find(n);
    if (it == r.first_valid.end()) return std::nullopt;
    t = std::max(t, it->second);
  }
  return t;
}

using SampleMap = std::map<Nanos, std::map<std::string, std::int32_t>>;

inline SampleMap output_samples(const Trace& t) {
  SampleMap m;
  for (const auto& r : t.records)
    if (r.annotation == Annotation::Data && t.signals[r.signal].role == SignalRole::PrimaryOutput)
      m[r.time][t.name_of(r.signal)] = r.value;
  return m;
}

}  // namespace detail

// `golden` is the same scenario run without faults; when absent the
// golden-dependent fields stay unset.
inline HealingMetrics metrics(const SimulationResult& run, const SimulationResult* golden, const TimingParams& timing) {
  HealingMetrics m;
  m.first_valid = detail::all_outputs_valid(run);
  if (golden) m.fault_free_latency = detail::all_outputs_valid(*golden);
  m.alarm = run.alarm;
  if (run.fail_safe_time >= 0) m.fail_safe_time = run.fail_safe_time;
  if (!run.restore_times.empty()) m.last_restore = *std::max_element(run.restore_times.begin(), run.restore_times.end());

  for (const auto& inj : run.injections) {
    if (!inj.applied) continue;
    ++m.faults_injected;
    if (inj.kind == FaultKind::PermanentGfb) {
      const auto it = std::find_if(run.syndromes.begin(), run.syndromes.end(), [&](const HealthSyndrome& s) {
        return s.cell_id == inj.cell && s.fault_kind == FaultClass::Permanent && s.detect_time >= inj.time;
      });
      if (it == run.syndromes.end()) continue;
      ++m.faults_detected;
      const bool restored = std::any_of(it->actions.begin(), it->actions.end(), [&](const TimedAction& a) {
        return a.action == HealAction::Restore &&
               std::find(run.restore_times.begin(), run.restore_times.end(), a.time) != run.restore_times.end();
      });
      if (restored) ++m.faults_healed;
    } else {
      // A register transient is handled when the voter masks it or the cell
      // flags it, at the first evaluation after the injection.
      const auto port_sig = to_string(inj.cell) + "." + std::string(to_string(inj.port));
      const auto cell_sig = to_string(inj.cell);
      const bool seen = std::any_of(run.trace.records.begin(), run.trace.records.end(), [&](const TraceRecord& r) {
        if (r.time < inj.time || r.time > inj.time + timing.cell_delay) return false;
        const auto& n = run.trace.name_of(r.signal);
        return (r.annotation == Annotation::MaskedTransient && n == port_sig) ||
               (r.annotation == Annotation::Mismatch && (n == port_sig || n == cell_sig));
      });
      if (seen) {
        ++m.faults_detected;
        ++m.faults_healed;
      }
    }
  }

  for (const auto& s : run.syndromes) {
    SyndromeMetrics sm;
    sm.cell = s.cell_id;
    sm.kind = s.fault_kind;
    sm.detect_time = s.detect_time;
    sm.escalated = s.escalated;
    for (const auto& inj : run.injections)
      if (inj.applied && inj.cell == s.cell_id && inj.time <= s.detect_time &&
          (inj.kind == FaultKind::PermanentGfb) == (s.fault_kind == FaultClass::Permanent))
        sm.injection_time = inj.time;
    if (sm.injection_time) sm.detect_latency = s.detect_time - *sm.injection_time;
    for (const auto& a : s.actions)
      if (a.action == HealAction::Restore &&
          std::find(run.restore_times.begin(), run.restore_times.end(), a.time) != run.restore_times.end())
        sm.restore_time = a.time;
    if (sm.restore_time && sm.injection_time) sm.heal_latency = *sm.restore_time - *sm.injection_time;
    m.syndromes.push_back(sm);
  }

  if (golden) {
    const auto got = detail::output_samples(run.trace);
    const auto want = detail::output_samples(golden->trace);
    std::set<Nanos> times;
    for (const auto& [t, _] : got) times.insert(t);
    for (const auto& [t, _] : want) times.insert(t);
    std::size_t bad = 0;
    std::optional<Nanos> last_bad;
    for (auto t : times) {
      const auto g = got.find(t);
      const auto w = want.find(t);
      const bool same = g != got.end() && w != want.end() && g->second == w->second;
      if (!same) {
        for (const auto& name : run.trace.output_names()) {
          const bool hg = g != got.end() && g->second.count(name);
          const bool hw = w != want.end() && w->second.count(name);
          if (hg != hw || (hg && g->second.at(name) != w->second.at(name))) ++bad;
        }
        last_bad = t;
      }
    }
    m.erroneous_output_samples = bad;
    if (m.last_restore) {
      for (const auto& [t, _] : got) {
        if (t < *m.last_restore || (last_bad && t <= *last_bad)) continue;
        m.heal_complete = t;
        break;
      }
    }
    if (m.heal_complete && m.fault_free_latency && *m.fault_free_latency > 0)
      m.heal_ratio = static_cast<double>(*m.heal_complete) / static_cast<double>(*m.fault_free_latency);
  }
  return m;
}

// key=value lines; unavailable fields print as "n/a".
inline std::string format_metrics(const HealingMetrics& m, const std::string& scenario, const TimingParams& timing) {
  std::ostringstream os;
  auto opt = [&](const auto& v) {
    std::ostringstream s;
    if (v)
      s << *v;
    else
      s << "n/a";
    return s.str();
  };
  os << "scenario=" << scenario << '\n';
  os << "version=" << kToolVersion << '\n';
  os << "timing.cell_delay=" << timing.cell_delay << '\n';
  os << "timing.threshold=" << timing.threshold << '\n';
  os << "timing.reroute_delay=" << timing.reroute_delay << '\n';
  os << "timing.restore_delay=" << timing.restore_delay << '\n';
  os << "timing.stimulus_period=" << timing.stimulus_period << '\n';
  os << "fault_free_latency=" << opt(m.fault_free_latency) << '\n';
  os << "first_valid=" << opt(m.first_valid) << '\n';
  os << "faults_injected=" << m.faults_injected << '\n';
  os << "faults_detected=" << m.faults_detected << '\n';
  os << "faults_healed=" << m.faults_healed << '\n';
  os << "erroneous_output_samples=" << opt(m.erroneous_output_samples) << '\n';
  os << "last_restore=" << opt(m.last_restore) << '\n';
  os << "heal_complete=" << opt(m.heal_complete) << '\n';
  if (m.heal_ratio) {
    std::ostringstream r;
    r.setf(std::ios::fixed);
    r.precision(4);
    r << *m.heal_ratio;
    os << "heal_ratio=" << r.str() << '\n';
  } else {
    os << "heal_ratio=n/a\n";
  }
  os << "alarm=" << to_string(m.alarm) << '\n';
  os << "fail_safe_time=" << opt(m.fail_safe_time) << '\n';
  for (std::size_t i = 0; i < m.syndromes.size(); ++i) {
    const auto& s = m.syndromes[i];
    const std::string p = "syndrome." + std::to_string(i) + ".";
    os << p << "cell=" << to_string(s.cell) << '\n';
    os << p << "kind=" << to_string(s.kind) << '\n';
    os << p << "detect_time=" << s.detect_time << '\n';
    os << p << "detect_latency=" << opt(s.detect_latency) << '\n';
    os << p << "restore_time=" << opt(s.restore_time) << '\n';
    os << p << "heal_latency=" << opt(s.heal_latency) << '\n';
    os << p << "escalated=" << (s.escalated ? "true" : "false") << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Scenario runs
// ---------------------------------------------------------------------------

struct RunOutcome {
  SimulationResult result;
  std::optional<SimulationResult> golden;  // only when the scenario injects faults
  HealingMetrics metrics;

  const SimulationResult& reference() const noexcept { return golden ? *golden : result; }
};

inline RunOutcome run(const Scenario& s) {
  RunOutcome o;
  o.result = simulate(s);
  if (!s.faults.empty()) o.golden = simulate(s.without_faults());
  o.metrics = metrics(o.result, &o.reference(), s.timing);
  return o;
}

// Each scenario runs on its own state; results come back in input order.
inline std::vector<RunOutcome> run_campaign(const std::vector<Scenario>& scenarios) {
  std::vector<std::future<RunOutcome>> jobs;
  jobs.reserve(scenarios.size());
  for (const auto& s : scenarios) jobs.push_back(std::async(std::launch::async, [&s] { return run(s); }));
  std::vector<RunOutcome> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

}  // namespace selfheal
