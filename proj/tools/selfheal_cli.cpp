#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "selfheal/selfheal.hpp"

namespace fs = std::filesystem;
using namespace selfheal;

namespace {

struct TimingOverrides {
  std::optional<Nanos> cell_delay;
  std::optional<unsigned> threshold;
  std::optional<Nanos> reroute_delay;
  std::optional<Nanos> restore_delay;
  std::optional<Nanos> stimulus_period;

  void apply(TimingParams& t) const {
    if (cell_delay) t.cell_delay = *cell_delay;
    if (threshold) t.threshold = *threshold;
    if (reroute_delay) t.reroute_delay = *reroute_delay;
    if (restore_delay) t.restore_delay = *restore_delay;
    if (stimulus_period) t.stimulus_period = *stimulus_period;
  }
};

int cmd_run(const std::vector<std::string>& files, const TimingOverrides& ov, std::optional<std::uint64_t> seed,
            const std::string& out_dir, const std::string& format) {
  std::vector<Scenario> scenarios;
  for (const auto& f : files) {
    Scenario s = load_scenario(f);
    ov.apply(s.timing);
    if (seed) s.seed = *seed;
    s.validate();
    scenarios.push_back(std::move(s));
  }
  if (!out_dir.empty()) fs::create_directories(out_dir);
  const auto outcomes = run_campaign(scenarios);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& s = scenarios[i];
    const auto& o = outcomes[i];
    const auto text = format_metrics(o.metrics, s.name, s.timing);
    if (!out_dir.empty()) {
      const fs::path base = fs::path(out_dir) / s.name;
      if (format == "csv" || format == "both")
        write_file(base.string() + ".csv", to_csv(o.result.trace, {.header_comments = true}));
      if (format == "vcd" || format == "both") write_file(base.string() + ".vcd", to_vcd(o.result.trace));
      write_file(base.string() + ".metrics.txt", text);
    }
    std::cout << text;
    if (o.metrics.alarm == Alarm::FailSafe) std::cout << "note: " << s.name << " ended in fail-safe\n";
    if (i + 1 < outcomes.size()) std::cout << '\n';
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  Netlist n;
  if (auto b = bundled_netlist(path))
    n = *b;
  else
    n = parse_netlist(read_file(path), fs::path(path).stem().string());
  const auto rep = depth(n);
  const auto placement = place(n);
  std::cout << n.nodes.size() << " nodes, depth " << rep.critical_path << ", " << placement.layer_count << " layers\n";
  std::cout << n.inputs.size() << " inputs, " << n.outputs.size() << " outputs\n";
  for (unsigned l = 0; l < placement.layer_count; ++l) {
    std::cout << "  layer " << l << ':';
    for (unsigned s = 0; s < kCellsPerLayer; ++s) {
      std::cout << ' ' << s << '=';
      bool found = false;
      for (std::size_t i = 0; i < n.nodes.size(); ++i) {
        if (placement.node_slot[i] == SlotRef{l, s}) {
          std::cout << n.nodes[i].id;
          found = true;
        }
      }
      if (!found) std::cout << '-';
    }
    std::cout << '\n';
  }
  for (const auto& o : n.outputs)
    std::cout << "  output " << o.name << " depth " << rep.node_depth[o.node] << '\n';
  return 0;
}

int cmd_disasm(const std::string& hex) {
  GeneticCode code;
  try {
    code = GeneticCode::from_hex(hex);
  } catch (const GeneticCodeError& e) {
    std::cerr << "usage: disasm expects 17 hex digits (66-bit code, top digit 0-3): " << e.what() << '\n';
    return 2;
  }
  std::cout << describe(decode_genetic(code)) << '\n';
  return 0;
}

void summarize_trace(const Trace& t) {
  std::map<std::string, std::size_t> by_annotation;
  std::map<std::string, Nanos> first;
  for (const auto& r : t.records) {
    ++by_annotation[std::string(to_string(r.annotation))];
    if (r.annotation == Annotation::Data) first.try_emplace(t.name_of(r.signal), r.time);
  }
  std::cout << "records=" << t.records.size() << '\n';
  for (const auto& [a, c] : by_annotation) std::cout << "records." << a << '=' << c << '\n';
  for (const auto& name : t.output_names())
    if (auto it = first.find(name); it != first.end()) std::cout << "first_valid." << name << '=' << it->second << '\n';
  for (const auto& r : t.records)
    if (r.annotation == Annotation::SyndromeAction)
      std::cout << "action t=" << r.time << ' ' << t.name_of(r.signal) << ' '
                << to_string(static_cast<HealAction>(r.value)) << '\n';
}

int cmd_report(const std::string& path, const TimingOverrides& ov) {
  if (fs::path(path).extension() == ".csv") {
    summarize_trace(parse_csv(read_file(path)));
    return 0;
  }
  Scenario s = load_scenario(path);
  ov.apply(s.timing);
  s.validate();
  const auto o = run(s);
  std::cout << format_metrics(o.metrics, s.name, s.timing);
  return 0;
}

int cmd_apps(const std::string& dump, const std::string& config) {
  if (!dump.empty()) {
    const auto text = bundled_netlist_text(dump);
    if (!text) throw ConfigError("unknown application '" + dump + "'");
    std::cout << *text;
    return 0;
  }
  if (!config.empty()) {
    const auto n = bundled_netlist(config);
    if (!n) throw ConfigError("unknown application '" + config + "'");
    std::cout << dump_configuration(map_netlist(*n));
    return 0;
  }
  for (const auto& a : kBundledApplications) std::cout << a.name << "  " << a.description << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-healing cell fabric simulator"};
  app.require_subcommand(1);

  TimingOverrides ov;
  std::vector<std::string> run_files;
  std::string out_dir, format = "both";
  std::optional<std::uint64_t> seed;
  auto* run_cmd = app.add_subcommand("run", "run one or more scenario files");
  run_cmd->add_option("scenarios", run_files, "scenario JSON files")->required();
  run_cmd->add_option("--out", out_dir, "directory for trace exports and metrics");
  run_cmd->add_option("--format", format, "trace export format")->check(CLI::IsMember({"csv", "vcd", "both"}));
  run_cmd->add_option("--seed", seed, "override the scenario seed");

  std::string netlist_path;
  auto* validate_cmd = app.add_subcommand("validate", "parse, validate and place a netlist");
  validate_cmd->add_option("netlist", netlist_path, "netlist file or bundled application name")->required();

  std::string hex;
  auto* disasm_cmd = app.add_subcommand("disasm", "decode a 66-bit genetic code");
  disasm_cmd->add_option("code", hex, "17 hex digits")->required();

  std::string report_path;
  auto* report_cmd = app.add_subcommand("report", "metrics for a scenario, or a summary of a CSV trace");
  report_cmd->add_option("input", report_path, "scenario JSON or trace CSV")->required();

  std::string dump, config;
  auto* apps_cmd = app.add_subcommand("apps", "list bundled applications");
  apps_cmd->add_option("--dump", dump, "print the netlist of an application");
  apps_cmd->add_option("--config", config, "print the per-cell configuration of an application");

  for (auto* c : {run_cmd, report_cmd}) {
    c->add_option("--timing.cell_delay", ov.cell_delay, "cell delay in ns")->check(CLI::PositiveNumber);
    c->add_option("--timing.threshold", ov.threshold, "consecutive mismatches for a permanent fault")
        ->check(CLI::PositiveNumber);
    c->add_option("--timing.reroute_delay", ov.reroute_delay, "reroute delay in ns")->check(CLI::PositiveNumber);
    c->add_option("--timing.restore_delay", ov.restore_delay, "restore delay in ns")->check(CLI::PositiveNumber);
    c->add_option("--timing.stimulus_period", ov.stimulus_period, "sample period in ns")->check(CLI::PositiveNumber);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run_files, ov, seed, out_dir, format);
    if (*validate_cmd) return cmd_validate(netlist_path);
    if (*disasm_cmd) return cmd_disasm(hex);
    if (*report_cmd) return cmd_report(report_path, ov);
    if (*apps_cmd) return cmd_apps(dump, config);
  } catch (const NetlistError& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (!e.members.empty()) {
      std::cerr << "cycle members:";
      for (const auto& m : e.members) std::cerr << ' ' << m;
      std::cerr << '\n';
    }
    return 1;
  } catch (const GeneticCodeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
