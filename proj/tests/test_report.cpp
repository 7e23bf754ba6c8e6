#include <gtest/gtest.h>

#include "selfheal/selfheal.hpp"

using namespace selfheal;

namespace {

std::string scenario_path(const std::string& name) {
  return std::string(SELFHEAL_SOURCE_DIR) + "/scenarios/" + name + ".json";
}

RunOutcome run_bundled(const std::string& name) { return run(load_scenario(scenario_path(name))); }

// Straight count of output samples that differ from the golden run at the same time.
std::size_t diff_count(const Trace& a, const Trace& b) {
  std::map<std::pair<Nanos, std::string>, std::int32_t> gold;
  for (const auto& r : b.records)
    if (r.annotation == Annotation::Data && b.signals[r.signal].role == SignalRole::PrimaryOutput)
      gold[{r.time, b.name_of(r.signal)}] = r.value;
  std::size_t n = 0;
  for (const auto& r : a.records) {
    if (r.annotation != Annotation::Data || a.signals[r.signal].role != SignalRole::PrimaryOutput) continue;
    auto it = gold.find({r.time, a.name_of(r.signal)});
    if (it == gold.end() || it->second != r.value) ++n;
  }
  return n;
}

}  // namespace

TEST(Csv, EmptyTraceIsHeaderOnly) {
  Trace t;
  EXPECT_EQ(to_csv(t), std::string(kCsvHeader) + "\n");
}

TEST(Csv, RoundTrip) {
  const auto r = run_bundled("edg_permanent_bt");
  const auto text = to_csv(r.result.trace, {.header_comments = true});
  const auto back = parse_csv(text);
  EXPECT_EQ(back.records.size(), r.result.trace.records.size());
  EXPECT_EQ(to_csv(back, {.header_comments = false}), to_csv(r.result.trace, {.header_comments = false}));
  for (const auto& s : r.result.trace.signals) {
    const auto id = back.find(s.name);
    ASSERT_TRUE(id) << s.name;
    EXPECT_EQ(back.signals[*id].role, s.role);
    EXPECT_EQ(back.signals[*id].width, s.width);
  }
}

TEST(Csv, RejectsBadRows) {
  EXPECT_ANY_THROW(parse_csv("time_ns,signal,value,annotation\n10,a,1\n"));
  EXPECT_ANY_THROW(parse_csv("time_ns,signal,value,annotation\n10,a,1,bogus\n"));
  EXPECT_ANY_THROW(parse_csv("time_ns,signal,value,annotation\n20,a,1,data\n10,a,0,data\n"));
}

TEST(Vcd, ChangesMatchTrace) {
  for (const auto* name : {"edg_faultfree", "edg_multifault4", "ccs_fc16_permanent"}) {
    const auto r = run_bundled(name);
    const auto dump = parse_vcd(to_vcd(r.result.trace));
    EXPECT_EQ(dump.timescale, "1ns") << name;
    EXPECT_EQ(dump.changes, expected_vcd_changes(r.result.trace)) << name;
  }
}

TEST(Vcd, ConstantSignalHasSingleEntry) {
  Trace t;
  const auto a = t.intern("a", WidthMode::Bit, SignalRole::PrimaryInput);
  const auto v = t.intern("v", WidthMode::Int16, SignalRole::PrimaryOutput);
  t.add(0, a, 1, Annotation::Data);
  t.add(35, v, -3, Annotation::Data);
  t.add(70, v, -3, Annotation::Data);
  t.add(105, v, 7, Annotation::Data);
  const auto dump = parse_vcd(to_vcd(t));
  std::size_t a_entries = 0;
  for (const auto& c : dump.changes) a_entries += c.signal == "a";
  EXPECT_EQ(a_entries, 1u);
  const std::vector<VcdChange> want{{0, "a", 1}, {0, "v", std::nullopt}, {35, "v", -3}, {105, "v", 7}};
  EXPECT_EQ(dump.changes, want);
}

TEST(Metrics, FaultFreeLatency) {
  const auto m = run_bundled("edg_faultfree").metrics;
  EXPECT_EQ(m.fault_free_latency, 245);
  EXPECT_EQ(m.faults_injected, 0u);
  EXPECT_FALSE(m.heal_ratio);
}

TEST(Metrics, TransientsMasked) {
  const auto m = run_bundled("edg_transient3").metrics;
  EXPECT_EQ(m.faults_injected, 3u);
  EXPECT_EQ(m.faults_detected, 3u);
  EXPECT_EQ(m.faults_healed, 3u);
  EXPECT_EQ(m.erroneous_output_samples, 0u);
}

TEST(Metrics, MultifaultRatioAboveTwo) {
  const auto m = run_bundled("edg_multifault4").metrics;
  ASSERT_TRUE(m.heal_ratio);
  EXPECT_GT(*m.heal_ratio, 2.0);
  EXPECT_EQ(m.heal_complete, 525);
}

TEST(Metrics, ErroneousSamplesAgreeWithDirectDiff) {
  for (const auto* name : {"edg_transient3", "edg_permanent_bt", "edg_multifault4", "ccs_fc16_permanent"}) {
    const auto r = run_bundled(name);
    ASSERT_TRUE(r.golden) << name;
    ASSERT_TRUE(r.metrics.erroneous_output_samples) << name;
    EXPECT_EQ(*r.metrics.erroneous_output_samples, diff_count(r.result.trace, r.golden->trace)) << name;
  }
}

TEST(Metrics, HealLatencyIsRestoreMinusInjection) {
  const auto m = run_bundled("edg_permanent_bt").metrics;
  ASSERT_EQ(m.syndromes.size(), 2u);
  for (const auto& s : m.syndromes) {
    ASSERT_TRUE(s.injection_time && s.restore_time && s.heal_latency);
    EXPECT_EQ(*s.heal_latency, *s.restore_time - *s.injection_time);
  }
  EXPECT_FALSE(m.syndromes[0].escalated);
  EXPECT_TRUE(m.syndromes[1].escalated);
}

TEST(Metrics, Deterministic) {
  const auto a = run_bundled("ccs_fc16_permanent");
  const auto b = run_bundled("ccs_fc16_permanent");
  EXPECT_EQ(a.metrics, b.metrics);
  EXPECT_EQ(format_metrics(a.metrics, "x", TimingParams{}), format_metrics(b.metrics, "x", TimingParams{}));
  EXPECT_EQ(to_csv(a.result.trace), to_csv(b.result.trace));
}

TEST(Metrics, FormatPrintsNaForMissing) {
  HealingMetrics m;
  const auto text = format_metrics(m, "s", TimingParams{});
  EXPECT_NE(text.find("heal_ratio=n/a\n"), std::string::npos);
  EXPECT_NE(text.find("heal_complete=n/a\n"), std::string::npos);
  EXPECT_NE(text.find("timing.cell_delay=35\n"), std::string::npos);
}

TEST(Campaign, MatchesSequentialRuns) {
  std::vector<Scenario> all;
  for (const auto* name : {"edg_faultfree", "edg_transient3", "edg_permanent_bt", "edg_multifault4"})
    all.push_back(load_scenario(scenario_path(name)));
  const auto par = run_campaign(all);
  ASSERT_EQ(par.size(), all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto seq = run(all[i]);
    EXPECT_EQ(par[i].metrics, seq.metrics);
    EXPECT_EQ(to_csv(par[i].result.trace), to_csv(seq.result.trace));
  }
}

TEST(OutputView, OnlyPrimaryOutputs) {
  const auto r = run_bundled("edg_faultfree");
  const auto v = output_view(r.result.trace);
  EXPECT_EQ(v.find("loss_of_offsite_power"), std::string::npos);
  EXPECT_NE(v.find(",EngineStart,1,data"), std::string::npos);
}
