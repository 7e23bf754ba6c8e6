#include <gtest/gtest.h>

#include "selfheal/netlist.hpp"
#include "selfheal/oracle.hpp"

using namespace selfheal;

namespace {

NetlistErrorKind error_kind(std::string_view text) {
  try {
    (void)parse_netlist(text);
  } catch (const NetlistError& e) {
    return e.kind;
  }
  ADD_FAILURE() << "netlist accepted:\n" << text;
  return NetlistErrorKind::Syntax;
}

}  // namespace

TEST(Netlist, ParsesBasicDesign) {
  const auto n = parse_netlist(R"(
input a : bit
input b : int16   # trailing comment
node x = ADD(b, imm) imm=-3
node y = CMP(x, b)
node z = AND(a, y)
output out = z
)");
  ASSERT_EQ(n.inputs.size(), 2u);
  ASSERT_EQ(n.nodes.size(), 3u);
  EXPECT_EQ(n.nodes[0].immediate, -3);
  EXPECT_EQ(n.nodes[0].width, WidthMode::Int16);
  EXPECT_EQ(n.nodes[1].width, WidthMode::Bit);
  EXPECT_EQ(n.outputs[0].name, "out");
  EXPECT_EQ(n.outputs[0].node, 2u);
}

TEST(Netlist, UnknownOpcode) { EXPECT_EQ(error_kind("input a : bit\nnode x = XOR(a, a)\noutput o = x\n"), NetlistErrorKind::UnknownOpcode); }

TEST(Netlist, Arity) {
  EXPECT_EQ(error_kind("input a : bit\nnode x = NOT(a, a)\noutput o = x\n"), NetlistErrorKind::Arity);
  EXPECT_EQ(error_kind("input a : bit\nnode x = AND(a)\noutput o = x\n"), NetlistErrorKind::Arity);
  EXPECT_EQ(error_kind("input a : bit\nnode x = OR(a, a, a, a, a)\noutput o = x\n"), NetlistErrorKind::Arity);
  EXPECT_EQ(error_kind("input a : int16\nnode x = SUB(a, a, a)\noutput o = x\n"), NetlistErrorKind::Arity);
}

TEST(Netlist, DanglingReference) {
  EXPECT_EQ(error_kind("input a : bit\nnode x = AND(a, q)\noutput o = x\n"), NetlistErrorKind::DanglingReference);
  EXPECT_EQ(error_kind("input a : bit\nnode x = NOT(a)\noutput o = nope\n"), NetlistErrorKind::DanglingReference);
}

TEST(Netlist, CycleListsMembers) {
  try {
    (void)parse_netlist("input x : bit\nnode a = AND(x, c)\nnode b = NOT(a)\nnode c = OR(b, x)\noutput y = c\n");
    FAIL();
  } catch (const NetlistError& e) {
    EXPECT_EQ(e.kind, NetlistErrorKind::Cycle);
    EXPECT_EQ(e.members, (std::vector<std::string>{"a", "b", "c"}));
  }
}

TEST(Netlist, LoopThroughDelayIsLegal) {
  const auto n = parse_netlist("input x : int16\nnode acc = ADD(prev, x)\nnode prev = DELAY(acc)\noutput y = acc\n");
  EXPECT_EQ(n.nodes[1].delay, 1u);
  const auto d = depth(n);
  EXPECT_EQ(d.node_depth[1], 1u);
  EXPECT_EQ(d.node_depth[0], 2u);
}

TEST(Netlist, WidthErrors) {
  EXPECT_EQ(error_kind("input a : bit\ninput b : int16\nnode x = AND(a, b)\noutput o = x\n"), NetlistErrorKind::Width);
  EXPECT_EQ(error_kind("input s : int16\ninput b : int16\nnode x = MUX(s, b, b)\noutput o = x\n"), NetlistErrorKind::Width);
}

TEST(Netlist, DuplicateAndSyntax) {
  EXPECT_EQ(error_kind("input a : bit\ninput a : bit\nnode x = NOT(a)\noutput o = x\n"), NetlistErrorKind::Duplicate);
  EXPECT_EQ(error_kind("input a : bit\nnode x NOT(a)\noutput o = x\n"), NetlistErrorKind::Syntax);
  EXPECT_EQ(error_kind("input a : wide\nnode x = NOT(a)\noutput o = x\n"), NetlistErrorKind::Syntax);
}

TEST(Netlist, ErrorCarriesLineNumber) {
  try {
    (void)parse_netlist("input a : bit\n\nnode x = FOO(a)\n");
    FAIL();
  } catch (const NetlistError& e) {
    EXPECT_EQ(e.line, 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Netlist, PartitionsMustCoverAllNodes) {
  EXPECT_NO_THROW(parse_netlist("# partition p: x\n# partition q: y\ninput a : bit\nnode x = NOT(a)\nnode y = NOT(x)\noutput o = y\n"));
  EXPECT_ANY_THROW(parse_netlist("# partition p: x\ninput a : bit\nnode x = NOT(a)\nnode y = NOT(x)\noutput o = y\n"));
}

TEST(Depth, ChainAndFanIn) {
  const auto n = parse_netlist(
      "input a : bit\ninput b : bit\nnode p = AND(a, b)\nnode q = NOT(p)\nnode r = OR(q, a)\noutput o = r\n");
  const auto d = depth(n);
  EXPECT_EQ(d.critical_path, 3u);
  EXPECT_EQ(d.node_depth, (std::vector<unsigned>{1, 2, 3}));
}

TEST(ReferenceEval, NotOfOne) {
  const auto n = parse_netlist("input a : bit\nnode x = NOT(a)\noutput o = x\n");
  const std::vector<std::int32_t> in{1};
  EXPECT_EQ(reference_eval(n, in, initial_delay_state(n)).outputs, std::vector<std::int32_t>{0});
}

TEST(ReferenceEval, IncompleteAssignment) {
  const auto n = parse_netlist("input a : bit\ninput b : bit\nnode x = AND(a, b)\noutput o = x\n");
  const std::vector<std::int32_t> in{1};
  EXPECT_THROW(reference_eval(n, in, initial_delay_state(n)), ConfigError);
  EXPECT_THROW(reference_eval(n, std::map<std::string, std::int32_t>{{"a", 1}}, initial_delay_state(n)), ConfigError);
}

TEST(ReferenceEval, DelayReadsPriorState) {
  const auto n = parse_netlist("input x : int16\nnode acc = ADD(prev, x)\nnode prev = DELAY(acc)\noutput y = acc\n");
  auto s = initial_delay_state(n);
  std::vector<std::int32_t> outs;
  for (int x : {1, 2, 3}) {
    const std::vector<std::int32_t> in{x};
    const auto r = reference_eval(n, in, s);
    outs.push_back(r.outputs[0]);
    s = r.next_state;
  }
  EXPECT_EQ(outs, (std::vector<std::int32_t>{1, 3, 6}));
}
