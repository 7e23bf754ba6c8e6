#include <gtest/gtest.h>

#include "selfheal/applications.hpp"
#include "selfheal/fabric.hpp"

using namespace selfheal;

namespace {

Fabric edg_fabric() { return Fabric(map_netlist(build_edg().netlist)); }

HealthSyndrome permanent(CellId id, Nanos t) {
  HealthSyndrome s;
  s.cell_id = id;
  s.fault_kind = FaultClass::Permanent;
  s.detect_time = t;
  return s;
}

void run_steps(Fabric& f, const std::vector<HealingStep>& steps) {
  for (const auto& st : steps) f.apply(st, st.time);
}

}  // namespace

TEST(Fabric, InitialState) {
  const auto f = edg_fabric();
  EXPECT_EQ(f.layers().size(), 4u);
  EXPECT_EQ(f.alarm(), Alarm::None);
  EXPECT_EQ(f.provider(0), (CellId{0, 0, CellKind::F}));
  EXPECT_EQ(f.health_map().free_spares.size(), 16u);
}

TEST(LocalHeal, ThreeActionsInOrder) {
  auto f = edg_fabric();
  auto s = permanent({1, 2, CellKind::F}, 100);
  const auto steps = heal(f, s, TimingParams{});
  ASSERT_EQ(s.actions.size(), 3u);
  EXPECT_EQ(s.actions[0].action, HealAction::Deactivate);
  EXPECT_EQ(s.actions[1].action, HealAction::Reroute);
  EXPECT_EQ(s.actions[2].action, HealAction::Restore);
  EXPECT_EQ(s.actions[0].time, 100);
  EXPECT_EQ(s.actions[1].time, 135);
  EXPECT_EQ(s.actions[2].time, 170);
  EXPECT_EQ(s.chosen_spare, (CellId{1, 0, CellKind::R}));
  EXPECT_FALSE(s.escalated);
  EXPECT_EQ(f.cell({1, 2, CellKind::F}).health, CellHealth::FaultyDeactivated);
  EXPECT_EQ(f.cell({1, 2, CellKind::F}).output.payload, 0);
  EXPECT_TRUE(f.function_valid(6));
  EXPECT_EQ(f.function_output(6).payload, 0);

  run_steps(f, steps);
  EXPECT_EQ(f.provider(6), (CellId{1, 0, CellKind::R}));
  EXPECT_EQ(f.cell({1, 0, CellKind::R}).health, CellHealth::SpareActive);
  EXPECT_EQ(f.cell({1, 0, CellKind::R}).config, *f.function_config(6));
  EXPECT_EQ(f.alarm(), Alarm::Degraded);
}

TEST(LocalHeal, PicksLowestFreeSpare) {
  auto f = edg_fabric();
  auto a = permanent({0, 3, CellKind::F}, 35);
  auto b = permanent({0, 1, CellKind::F}, 35);
  (void)heal(f, a, TimingParams{});
  (void)heal(f, b, TimingParams{});
  EXPECT_EQ(a.chosen_spare, (CellId{0, 0, CellKind::R}));
  EXPECT_EQ(b.chosen_spare, (CellId{0, 1, CellKind::R}));
}

TEST(GlobalHeal, SpareOfSpareStaysInLayerWhenPossible) {
  auto f = edg_fabric();
  auto first = permanent({0, 0, CellKind::F}, 70);
  run_steps(f, heal(f, first, TimingParams{}));
  auto second = permanent({0, 0, CellKind::R}, 210);
  (void)heal(f, second, TimingParams{});
  EXPECT_TRUE(second.escalated);
  EXPECT_EQ(second.chosen_spare, (CellId{0, 1, CellKind::R}));
  EXPECT_EQ(second.function, 0u);
}

TEST(GlobalHeal, BorrowsNearestLayerWhenExhausted) {
  auto f = edg_fabric();
  for (unsigned s = 0; s < 4; ++s) {
    auto syn = permanent({1, s, CellKind::F}, 35);
    run_steps(f, heal(f, syn, TimingParams{}));
  }
  auto extra = permanent({1, 0, CellKind::R}, 500);
  (void)heal(f, extra, TimingParams{});
  ASSERT_TRUE(extra.chosen_spare);
  EXPECT_EQ(extra.chosen_spare->layer, 0u);  // distance 1 below wins over above
  EXPECT_EQ(extra.chosen_spare->slot, 0u);
}

TEST(GlobalHeal, FailSafeWhenNoSpareAnywhere) {
  Fabric f(map_netlist(parse_netlist("input a : bit\nnode g = NOT(a)\noutput o = g\n")));
  auto syn = permanent({0, 0, CellKind::F}, 35);
  run_steps(f, heal(f, syn, TimingParams{}));
  for (unsigned s = 0; s < 4; ++s) {
    auto next = permanent({0, s, CellKind::R}, 1000 + 100 * s);
    run_steps(f, heal(f, next, TimingParams{}));
    if (s < 3) {
      EXPECT_EQ(f.alarm(), Alarm::Degraded);
      EXPECT_TRUE(next.chosen_spare);
    } else {
      EXPECT_FALSE(next.chosen_spare);
      EXPECT_EQ(f.alarm(), Alarm::FailSafe);
    }
  }
}

TEST(Heal, TransientNeedsNoAction) {
  auto f = edg_fabric();
  HealthSyndrome s;
  s.cell_id = {0, 0, CellKind::F};
  s.fault_kind = FaultClass::Transient;
  EXPECT_TRUE(heal(f, s, TimingParams{}).empty());
  EXPECT_TRUE(s.actions.empty());
  EXPECT_EQ(f.cell({0, 0, CellKind::F}).health, CellHealth::Healthy);
}

TEST(Fabric, RestoreRunsThroughConfigurationMemory) {
  auto f = edg_fabric();
  auto syn = permanent({2, 1, CellKind::F}, 35);
  const auto steps = heal(f, syn, TimingParams{});
  f.apply(steps[0], steps[0].time);
  EXPECT_TRUE(f.clocked(f.cell({2, 0, CellKind::R})));
  EXPECT_FALSE(f.cell({2, 0, CellKind::R}).evaluating());
  EXPECT_EQ(f.function_of({2, 0, CellKind::R}), 9u);
  f.apply(steps[1], steps[1].time);
  EXPECT_EQ(f.cell({2, 0, CellKind::R}).code, encode_genetic(*f.function_config(9)));
  EXPECT_TRUE(f.cell({2, 0, CellKind::R}).evaluating());
}
