#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "selfheal/value.hpp"

namespace selfheal {

enum class NetlistErrorKind { Syntax, UnknownOpcode, Arity, DanglingReference, Cycle, Width, Duplicate, Capacity };

struct NetlistError : Error {
  NetlistErrorKind kind;
  unsigned line;  // 1-based, 0 when not tied to a line
  std::vector<std::string> members;  // cycle members for Cycle errors

  NetlistError(NetlistErrorKind k, unsigned ln, const std::string& msg, std::vector<std::string> m = {})
      : Error(ln ? "line " + std::to_string(ln) + ": " + msg : msg), kind(k), line(ln), members(std::move(m)) {}
};

enum class RefKind : std::uint8_t { Input, Node, Immediate };

struct OperandRef {
  RefKind kind = RefKind::Input;
  std::size_t index = 0;

  friend bool operator==(const OperandRef&, const OperandRef&) = default;
};

struct NetInput {
  std::string name;
  WidthMode width = WidthMode::Bit;
};

struct NetNode {
  std::string id;
  Opcode op = Opcode::Nop;
  std::vector<OperandRef> operands;
  std::int16_t immediate = 0;
  std::uint8_t delay = 0;
  WidthMode width = WidthMode::Bit;
  unsigned line = 0;
};

struct NetOutput {
  std::string name;
  std::size_t node = 0;
};

struct Partition {
  std::string name;
  std::vector<std::size_t> nodes;
};

struct Netlist {
  std::string name;
  std::vector<NetInput> inputs;
  std::vector<NetNode> nodes;
  std::vector<NetOutput> outputs;
  std::vector<Partition> partitions;

  std::optional<std::size_t> find_input(std::string_view n) const {
    for (std::size_t i = 0; i < inputs.size(); ++i)
      if (inputs[i].name == n) return i;
    return std::nullopt;
  }
  std::optional<std::size_t> find_node(std::string_view n) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].id == n) return i;
    return std::nullopt;
  }
  std::optional<std::size_t> find_output(std::string_view n) const {
    for (std::size_t i = 0; i < outputs.size(); ++i)
      if (outputs[i].name == n) return i;
    return std::nullopt;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  s = trim(s);
  Int v{};
  const char* b = s.data();
  if (!s.empty() && s[0] == '+') ++b;
  auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

struct PendingNode {
  NetNode node;
  std::vector<std::string> refs;
};

}  // namespace detail

// Resolves operand widths and rejects mixed-width operands. DELAY and the
// logic operators inherit their width from operands, so widths are found by
// fixed-point iteration over feedback loops.
inline void infer_widths(Netlist& n) {
  const std::size_t count = n.nodes.size();
  std::vector<std::optional<WidthMode>> width(count);
  auto operand_width = [&](const OperandRef& r) -> std::optional<WidthMode> {
    switch (r.kind) {
      case RefKind::Input: return n.inputs[r.index].width;
      case RefKind::Node: return width[r.index];
      case RefKind::Immediate: return std::nullopt;
    }
    return std::nullopt;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < count; ++i) {
      if (width[i]) continue;
      const auto& node = n.nodes[i];
      std::optional<WidthMode> w;
      switch (node.op) {
        case Opcode::Add:
        case Opcode::Sub:
        case Opcode::Mul: w = WidthMode::Int16; break;
        case Opcode::Cmp:
        case Opcode::Nop: w = WidthMode::Bit; break;
        case Opcode::And:
        case Opcode::Or:
        case Opcode::Not:
        case Opcode::Delay:
          for (const auto& r : node.operands)
            if (auto ow = operand_width(r)) w = ow;
          break;
        case Opcode::Mux:
          for (std::size_t k = 1; k < node.operands.size(); ++k)
            if (auto ow = operand_width(node.operands[k])) w = ow;
          break;
      }
      if (w) {
        width[i] = w;
        changed = true;
      }
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    auto& node = n.nodes[i];
    node.width = width[i].value_or(WidthMode::Bit);
    auto check_same = [&](std::size_t from) {
      for (std::size_t k = from; k < node.operands.size(); ++k) {
        auto ow = operand_width(node.operands[k]);
        if (ow && *ow != node.width)
          throw NetlistError(NetlistErrorKind::Width, node.line,
                             "width mismatch in node '" + node.id + "': operand " + std::to_string(k + 1) + " is " +
                                 std::string(to_string(*ow)) + ", node is " + std::string(to_string(node.width)));
      }
    };
    switch (node.op) {
      case Opcode::And:
      case Opcode::Or:
      case Opcode::Not: check_same(0); break;
      case Opcode::Mux: {
        auto sw = operand_width(node.operands[0]);
        if (sw && *sw != WidthMode::Bit)
          throw NetlistError(NetlistErrorKind::Width, node.line, "MUX selector of node '" + node.id + "' must be bit");
        check_same(1);
        break;
      }
      default: break;
    }
  }
}

// Rejects combinational loops. Edges into DELAY nodes are registered and do
// not count.
inline void check_acyclic(const Netlist& n) {
  const std::size_t count = n.nodes.size();
  std::vector<unsigned> indegree(count, 0);
  std::vector<std::vector<std::size_t>> fanout(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (n.nodes[i].op == Opcode::Delay) continue;
    for (const auto& r : n.nodes[i].operands) {
      if (r.kind != RefKind::Node) continue;
      fanout[r.index].push_back(i);
      ++indegree[i];
    }
  }
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < count; ++i)
    if (indegree[i] == 0) ready.push_back(i);
  std::size_t seen = 0;
  while (!ready.empty()) {
    const auto i = ready.back();
    ready.pop_back();
    ++seen;
    for (auto j : fanout[i])
      if (--indegree[j] == 0) ready.push_back(j);
  }
  if (seen == count) return;
  std::vector<std::string> members;
  unsigned line = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (indegree[i] == 0) continue;
    members.push_back(n.nodes[i].id);
    if (!line) line = n.nodes[i].line;
  }
  std::string list;
  for (const auto& m : members) list += (list.empty() ? "" : ", ") + m;
  throw NetlistError(NetlistErrorKind::Cycle, line, "combinational cycle involving: " + list, members);
}

// Line-oriented netlist text:
//   input <name> : bit|int16
//   node <id> = <OPCODE>(<ref>{, <ref>}) [imm=<int>] [delay=<k>]
//   output <name> = <id>
//   # partition <group>: <id>, <id>, ...
// The operand name `imm` reads the node's immediate.
inline Netlist parse_netlist(std::string_view text, std::string name = "netlist") {
  using namespace detail;
  Netlist n;
  n.name = std::move(name);
  std::vector<PendingNode> pending;
  std::vector<std::pair<std::string, std::pair<std::string, unsigned>>> pending_outputs;
  std::vector<std::pair<Partition, std::pair<std::vector<std::string>, unsigned>>> pending_parts;
  std::map<std::string, unsigned, std::less<>> declared;

  auto declare = [&](std::string_view id, unsigned line) {
    if (id == "imm") throw NetlistError(NetlistErrorKind::Syntax, line, "'imm' is reserved");
    if (!is_identifier(id)) throw NetlistError(NetlistErrorKind::Syntax, line, "invalid identifier '" + std::string(id) + "'");
    if (auto it = declared.find(id); it != declared.end())
      throw NetlistError(NetlistErrorKind::Duplicate, line,
                         "'" + std::string(id) + "' already declared at line " + std::to_string(it->second));
    declared.emplace(std::string(id), line);
  };

  unsigned line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      auto comment = trim(line.substr(hash + 1));
      if (comment.substr(0, 9) == "partition" && comment.size() > 9 && std::isspace(static_cast<unsigned char>(comment[9]))) {
        auto body = trim(comment.substr(9));
        const auto colon = body.find(':');
        if (colon == std::string_view::npos)
          throw NetlistError(NetlistErrorKind::Syntax, line_no, "partition pragma needs '<group>: <ids>'");
        Partition p;
        p.name = std::string(trim(body.substr(0, colon)));
        std::vector<std::string> ids;
        for (auto id : split(body.substr(colon + 1), ','))
          if (!id.empty()) ids.emplace_back(id);
        pending_parts.push_back({std::move(p), {std::move(ids), line_no}});
      }
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto sp = line.find_first_of(" \t");
    const auto keyword = line.substr(0, sp);
    const auto rest = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp));

    if (keyword == "input") {
      const auto colon = rest.find(':');
      if (colon == std::string_view::npos)
        throw NetlistError(NetlistErrorKind::Syntax, line_no, "expected 'input <name> : bit|int16'");
      const auto id = trim(rest.substr(0, colon));
      const auto w = parse_width(trim(rest.substr(colon + 1)));
      if (!w) throw NetlistError(NetlistErrorKind::Syntax, line_no, "unknown width '" + std::string(trim(rest.substr(colon + 1))) + "'");
      declare(id, line_no);
      n.inputs.push_back({std::string(id), *w});
    } else if (keyword == "node") {
      const auto eq = rest.find('=');
      const auto open = rest.find('(');
      const auto close = rest.rfind(')');
      if (eq == std::string_view::npos || open == std::string_view::npos || close == std::string_view::npos ||
          open < eq || close < open)
        throw NetlistError(NetlistErrorKind::Syntax, line_no, "expected 'node <id> = <OPCODE>(<refs>)'");
      const auto id = trim(rest.substr(0, eq));
      const auto opname = trim(rest.substr(eq + 1, open - eq - 1));
      const auto op = parse_opcode(opname);
      if (!op) throw NetlistError(NetlistErrorKind::UnknownOpcode, line_no, "unknown opcode '" + std::string(opname) + "'");
      declare(id, line_no);
      PendingNode pn;
      pn.node.id = std::string(id);
      pn.node.op = *op;
      pn.node.line = line_no;
      const auto args = trim(rest.substr(open + 1, close - open - 1));
      if (!args.empty())
        for (auto a : split(args, ',')) {
          if (a.empty()) throw NetlistError(NetlistErrorKind::Syntax, line_no, "empty operand");
          pn.refs.emplace_back(a);
        }
      bool saw_delay = false;
      std::istringstream attrs{std::string(trim(rest.substr(close + 1)))};
      for (std::string attr; attrs >> attr;) {
        if (attr.rfind("imm=", 0) == 0) {
          auto v = parse_int<int>(std::string_view(attr).substr(4));
          if (!v || *v < -32768 || *v > 32767)
            throw NetlistError(NetlistErrorKind::Syntax, line_no, "imm must be a 16-bit signed integer");
          pn.node.immediate = static_cast<std::int16_t>(*v);
        } else if (attr.rfind("delay=", 0) == 0) {
          auto v = parse_int<int>(std::string_view(attr).substr(6));
          if (!v || *v < 0 || *v > 255) throw NetlistError(NetlistErrorKind::Syntax, line_no, "delay must be in 0..255");
          pn.node.delay = static_cast<std::uint8_t>(*v);
          saw_delay = true;
        } else {
          throw NetlistError(NetlistErrorKind::Syntax, line_no, "unknown attribute '" + attr + "'");
        }
      }
      if (pn.node.op == Opcode::Delay) {
        if (!saw_delay) pn.node.delay = 1;
        if (pn.node.delay < 1) throw NetlistError(NetlistErrorKind::Syntax, line_no, "DELAY requires delay >= 1");
      } else if (pn.node.delay != 0) {
        throw NetlistError(NetlistErrorKind::Syntax, line_no, "delay= is only valid on DELAY nodes");
      }
      const auto ar = arity(pn.node.op);
      if (pn.refs.size() < ar.min || pn.refs.size() > ar.max) {
        const bool fanin = pn.refs.size() > 4;
        throw NetlistError(NetlistErrorKind::Arity, line_no,
                           std::string(to_string(pn.node.op)) + " takes " + std::to_string(ar.min) +
                               (ar.min == ar.max ? "" : ".." + std::to_string(ar.max)) + " operands, got " +
                               std::to_string(pn.refs.size()) + (fanin ? " (a cell has 4 ports)" : ""));
      }
      pending.push_back(std::move(pn));
    } else if (keyword == "output") {
      const auto eq = rest.find('=');
      if (eq == std::string_view::npos)
        throw NetlistError(NetlistErrorKind::Syntax, line_no, "expected 'output <name> = <id>'");
      const auto oname = trim(rest.substr(0, eq));
      if (!is_identifier(oname))
        throw NetlistError(NetlistErrorKind::Syntax, line_no, "invalid output name '" + std::string(oname) + "'");
      for (const auto& po : pending_outputs)
        if (po.first == oname)
          throw NetlistError(NetlistErrorKind::Duplicate, line_no, "output '" + std::string(oname) + "' declared twice");
      pending_outputs.push_back({std::string(oname), {std::string(trim(rest.substr(eq + 1))), line_no}});
    } else {
      throw NetlistError(NetlistErrorKind::Syntax, line_no, "unknown statement '" + std::string(keyword) + "'");
    }
  }

  if (n.inputs.size() > 64) throw NetlistError(NetlistErrorKind::Capacity, 0, "at most 64 primary inputs are addressable");

  std::map<std::string, std::size_t, std::less<>> node_index;
  for (std::size_t i = 0; i < pending.size(); ++i) node_index.emplace(pending[i].node.id, i);

  for (auto& pn : pending) {
    for (const auto& ref : pn.refs) {
      if (ref == "imm") {
        pn.node.operands.push_back({RefKind::Immediate, 0});
      } else if (auto in = n.find_input(ref)) {
        pn.node.operands.push_back({RefKind::Input, *in});
      } else if (auto it = node_index.find(ref); it != node_index.end()) {
        pn.node.operands.push_back({RefKind::Node, it->second});
      } else {
        throw NetlistError(NetlistErrorKind::DanglingReference, pn.node.line,
                           "node '" + pn.node.id + "' references undeclared '" + ref + "'");
      }
    }
    n.nodes.push_back(std::move(pn.node));
  }
  for (auto& [oname, target] : pending_outputs) {
    auto it = node_index.find(target.first);
    if (it == node_index.end())
      throw NetlistError(NetlistErrorKind::DanglingReference, target.second,
                         "output '" + oname + "' references unknown node '" + target.first + "'");
    n.outputs.push_back({oname, it->second});
  }
  std::vector<bool> in_partition(n.nodes.size(), false);
  for (auto& [part, ids] : pending_parts) {
    for (const auto& id : ids.first) {
      auto it = node_index.find(id);
      if (it == node_index.end())
        throw NetlistError(NetlistErrorKind::DanglingReference, ids.second,
                           "partition '" + part.name + "' references unknown node '" + id + "'");
      if (in_partition[it->second])
        throw NetlistError(NetlistErrorKind::Duplicate, ids.second, "node '" + id + "' appears in two partitions");
      in_partition[it->second] = true;
      part.nodes.push_back(it->second);
    }
    n.partitions.push_back(std::move(part));
  }
  if (!n.partitions.empty() && std::find(in_partition.begin(), in_partition.end(), false) != in_partition.end())
    throw NetlistError(NetlistErrorKind::Syntax, 0, "partition pragmas must cover every node");

  check_acyclic(n);
  infer_widths(n);
  return n;
}

struct DepthReport {
  std::vector<unsigned> node_depth;
  unsigned critical_path = 0;
};

// Combinational depth: inputs are depth 0, each node adds 1, and the edge into
// a DELAY node is cut so DELAY nodes sit at depth 1.
inline DepthReport depth(const Netlist& n) {
  DepthReport r;
  r.node_depth.assign(n.nodes.size(), 0);
  std::vector<int> mark(n.nodes.size(), 0);  // 0 new, 1 visiting, 2 done
  auto visit = [&](auto&& self, std::size_t i) -> unsigned {
    if (mark[i] == 2) return r.node_depth[i];
    if (mark[i] == 1) throw NetlistError(NetlistErrorKind::Cycle, n.nodes[i].line, "combinational cycle at '" + n.nodes[i].id + "'");
    mark[i] = 1;
    unsigned d = 0;
    if (n.nodes[i].op != Opcode::Delay)
      for (const auto& op : n.nodes[i].operands)
        if (op.kind == RefKind::Node) d = std::max(d, self(self, op.index));
    mark[i] = 2;
    return r.node_depth[i] = d + 1;
  };
  for (std::size_t i = 0; i < n.nodes.size(); ++i) r.critical_path = std::max(r.critical_path, visit(visit, i));
  return r;
}

}  // namespace selfheal
