#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "selfheal/applications.hpp"
#include "selfheal/engine.hpp"

namespace selfheal {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + p.string() + "': file not found");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << text;
}

// Bundled name ("edg", "ccs") or a netlist path, relative paths resolved
// against `base_dir`.
inline Netlist resolve_application(const std::string& app, const std::filesystem::path& base_dir = {}) {
  if (auto n = bundled_netlist(app)) return *n;
  std::filesystem::path p(app);
  if (p.extension() != ".nl") throw ConfigError("unknown application '" + app + "'");
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return parse_netlist(read_file(p), p.stem().string());
}

namespace detail {

using nlohmann::json;

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

inline TimingParams parse_timing(const json& j, TimingParams t) {
  if (!j.is_object()) throw ConfigError("'timing' must be an object");
  for (const auto& [k, _] : j.items())
    if (k != "cell_delay" && k != "threshold" && k != "reroute_delay" && k != "restore_delay" && k != "stimulus_period")
      throw ConfigError("unknown timing field '" + k + "'");
  t.cell_delay = get_or<Nanos>(j, "cell_delay", t.cell_delay);
  t.threshold = get_or<unsigned>(j, "threshold", t.threshold);
  t.reroute_delay = get_or<Nanos>(j, "reroute_delay", t.reroute_delay);
  t.restore_delay = get_or<Nanos>(j, "restore_delay", t.restore_delay);
  t.stimulus_period = get_or<Nanos>(j, "stimulus_period", t.stimulus_period);
  return t;
}

inline FaultSpec parse_fault(const json& j) {
  if (!j.is_object()) throw ConfigError("fault entries must be objects");
  FaultSpec f;
  const auto kind = get_or<std::string>(j, "kind", "");
  if (kind == "transient")
    f.kind = FaultKind::TransientRegister;
  else if (kind == "permanent")
    f.kind = FaultKind::PermanentGfb;
  else if (kind == "intermittent")
    f.kind = FaultKind::IntermittentBurst;
  else
    throw ConfigError("fault kind must be transient, permanent or intermittent, got '" + kind + "'");
  if (j.contains("cell")) {
    const auto s = get_or<std::string>(j, "cell", "");
    f.cell = parse_cell_id(s);
    if (!f.cell) throw ConfigError("bad cell id '" + s + "' (expected e.g. L0.F0)");
  }
  f.node = get_or<std::string>(j, "node", "");
  if (f.cell && !f.node.empty()) throw ConfigError("fault gives both 'cell' and 'node'");
  if (j.contains("port")) {
    const auto p = parse_port(get_or<std::string>(j, "port", ""));
    if (!p) throw ConfigError("bad port in fault");
    f.port = *p;
  }
  const auto replica = get_or<int>(j, "replica", 0);
  if (replica < 0 || replica > 2) throw ConfigError("fault replica must be 0, 1 or 2");
  f.replica = static_cast<unsigned>(replica);
  f.time = get_or<Nanos>(j, "time", 0);
  f.period = get_or<Nanos>(j, "period", 0);
  f.count = get_or<unsigned>(j, "count", 0);
  f.flip_mask = get_or<std::int32_t>(j, "flip", 1);
  if (j.contains("stuck")) f.stuck_value = get_or<std::int32_t>(j, "stuck", 0);
  f.validate();
  return f;
}

}  // namespace detail

inline Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {}) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  Scenario s;
  s.name = detail::get_or<std::string>(j, "name", "scenario");
  s.application = detail::get_or<std::string>(j, "application", "");
  if (s.application.empty()) throw ConfigError("scenario has no 'application'");
  s.netlist = resolve_application(s.application, base_dir);
  if (j.contains("timing")) s.timing = detail::parse_timing(j.at("timing"), s.timing);
  if (j.contains("stimulus")) {
    if (!j.at("stimulus").is_array()) throw ConfigError("'stimulus' must be a list");
    for (const auto& e : j.at("stimulus")) {
      if (!e.is_object() || !e.contains("name") || !e.contains("value"))
        throw ConfigError("malformed stimulus entry: " + e.dump());
      s.stimulus.push_back({detail::get_or<Nanos>(e, "t", 0), detail::get_or<std::string>(e, "name", ""),
                            detail::get_or<std::int32_t>(e, "value", 0)});
    }
  }
  if (j.contains("faults")) {
    if (!j.at("faults").is_array()) throw ConfigError("'faults' must be a list");
    for (const auto& f : j.at("faults")) s.faults.push_back(detail::parse_fault(f));
  }
  if (j.contains("plant")) {
    const auto& p = j.at("plant");
    PlantLoop loop;
    if (p.contains("gain")) loop.params.gain = Q8_8::from_double(detail::get_or<double>(p, "gain", 1.0));
    if (p.contains("drag")) loop.params.drag = Q8_8::from_double(detail::get_or<double>(p, "drag", 0.25));
    if (p.contains("dt")) loop.params.dt = Q8_8::from_double(detail::get_or<double>(p, "dt", 0.25));
    loop.drive = detail::get_or<std::string>(p, "drive", loop.drive);
    loop.feedback = detail::get_or<std::string>(p, "feedback", loop.feedback);
    s.plant = loop;
  }
  if (j.contains("random_stimulus")) {
    const auto& r = j.at("random_stimulus");
    RandomStimulus rs;
    rs.inputs = detail::get_or<std::vector<std::string>>(r, "inputs", {});
    rs.start = detail::get_or<Nanos>(r, "start", 0);
    rs.period = detail::get_or<Nanos>(r, "period", s.timing.stimulus_period);
    rs.count = detail::get_or<unsigned>(r, "count", 0);
    s.random_stimulus = rs;
  }
  s.run_until = detail::get_or<Nanos>(j, "run_until", 0);
  s.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
  s.validate();
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& p) {
  return parse_scenario(read_file(p), p.parent_path());
}

}  // namespace selfheal
