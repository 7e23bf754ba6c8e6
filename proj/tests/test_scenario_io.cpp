#include <filesystem>

#include <gtest/gtest.h>

#include "selfheal/selfheal.hpp"

using namespace selfheal;

namespace {

const std::filesystem::path kRoot = SELFHEAL_SOURCE_DIR;

std::string edg_stimulus() {
  std::string s = R"("stimulus": [)";
  const auto n = build_edg().netlist;
  for (std::size_t i = 0; i < n.inputs.size(); ++i) {
    if (i) s += ",";
    s += R"({"t": 0, "name": ")" + n.inputs[i].name + R"(", "value": 0})";
  }
  return s + "]";
}

std::string minimal(const std::string& extra) {
  return R"({"name": "m", "application": "edg", "run_until": 700, )" + edg_stimulus() +
         (extra.empty() ? "" : ", " + extra) + "}";
}

}  // namespace

TEST(ScenarioIo, Minimal) {
  const auto s = parse_scenario(minimal(""));
  EXPECT_EQ(s.name, "m");
  EXPECT_EQ(s.run_until, 700);
  EXPECT_EQ(s.stimulus.size(), 14u);
  EXPECT_EQ(s.timing.cell_delay, 35);
}

TEST(ScenarioIo, TimingOverrides) {
  const auto s = parse_scenario(minimal(R"("timing": {"cell_delay": 40, "threshold": 3})"));
  EXPECT_EQ(s.timing.cell_delay, 40);
  EXPECT_EQ(s.timing.threshold, 3u);
  EXPECT_THROW(parse_scenario(minimal(R"("timing": {"cell_dly": 40})")), ConfigError);
  EXPECT_THROW(parse_scenario(minimal(R"("timing": {"cell_delay": 0})")), ConfigError);
}

TEST(ScenarioIo, Faults) {
  const auto s = parse_scenario(minimal(
      R"("faults": [{"kind": "transient", "cell": "L0.F1", "port": "W", "replica": 2, "time": 100},
                    {"kind": "permanent", "node": "hard_trip", "time": 200, "stuck": 0},
                    {"kind": "intermittent", "cell": "L1.F0", "time": 10, "period": 50, "count": 4}])"));
  ASSERT_EQ(s.faults.size(), 3u);
  EXPECT_EQ(s.faults[0].port, Port::West);
  EXPECT_EQ(s.faults[0].replica, 2u);
  EXPECT_EQ(s.faults[1].node, "hard_trip");
  EXPECT_EQ(s.faults[1].stuck_value, 0);
  EXPECT_EQ(s.faults[2].count, 4u);
}

TEST(ScenarioIo, FaultErrors) {
  EXPECT_THROW(parse_scenario(minimal(R"("faults": [{"kind": "cosmic", "cell": "L0.F0"}])")), ConfigError);
  EXPECT_THROW(parse_scenario(minimal(R"("faults": [{"kind": "transient", "cell": "X9"}])")), ConfigError);
  EXPECT_THROW(parse_scenario(minimal(R"("faults": [{"kind": "transient", "cell": "L0.F0", "replica": 5}])")),
               ConfigError);
  EXPECT_THROW(parse_scenario(minimal(R"("faults": [{"kind": "permanent", "node": "nonexistent"}])")), ConfigError);
  EXPECT_THROW(parse_scenario(minimal(R"("faults": [{"kind": "intermittent", "cell": "L0.F0", "count": 3}])")),
               ConfigError);
}

TEST(ScenarioIo, Errors) {
  EXPECT_THROW(parse_scenario("{not json"), ConfigError);
  EXPECT_THROW(parse_scenario("[]"), ConfigError);
  EXPECT_THROW(parse_scenario(R"({"name": "x"})"), ConfigError);
  EXPECT_THROW(parse_scenario(R"({"application": "nope", "run_until": 10})"), ConfigError);
  EXPECT_THROW(parse_scenario(R"({"application": "edg", "run_until": 10, "stimulus": []})"), ConfigError);
  EXPECT_THROW(parse_scenario(R"({"application": "edg", "run_until": "soon"})"), ConfigError);
}

TEST(ScenarioIo, MissingFile) {
  try {
    (void)load_scenario(kRoot / "scenarios" / "does_not_exist.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("file not found"), std::string::npos);
  }
}

TEST(ScenarioIo, NetlistPathRelativeToScenario) {
  const auto s = load_scenario(kRoot / "tests" / "data" / "fail_safe.json");
  EXPECT_FALSE(s.netlist.nodes.empty());
}

TEST(ScenarioIo, AllBundledScenariosLoad) {
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(kRoot / "scenarios")) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_scenario(e.path())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 6u);
}

TEST(ScenarioIo, PlantBlock) {
  const auto s = load_scenario(kRoot / "scenarios" / "ccs_step.json");
  ASSERT_TRUE(s.plant);
  EXPECT_EQ(s.plant->drive, "throttle");
  EXPECT_EQ(s.plant->feedback, "actual_speed");
}
