#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>

#include "selfheal/value.hpp"

namespace selfheal {

enum class Port : std::uint8_t { North = 0, West = 1, East = 2, South = 3 };

inline constexpr std::array<Port, 4> kPorts = {Port::North, Port::West, Port::East, Port::South};

inline std::string_view to_string(Port p) noexcept {
  switch (p) {
    case Port::North: return "N";
    case Port::West: return "W";
    case Port::East: return "E";
    case Port::South: return "S";
  }
  return "?";
}

inline std::optional<Port> parse_port(std::string_view s) noexcept {
  if (s == "N" || s == "North") return Port::North;
  if (s == "W" || s == "West") return Port::West;
  if (s == "E" || s == "East") return Port::East;
  if (s == "S" || s == "South") return Port::South;
  return std::nullopt;
}

enum class SelectorKind : std::uint8_t { Unused = 0, PrimaryInput = 1, CellOutput = 2, Constant = 3 };

struct InputSelector {
  SelectorKind kind = SelectorKind::Unused;
  std::uint8_t index = 0;  // 0..63, meaningful for PrimaryInput / CellOutput only

  static constexpr InputSelector unused() noexcept { return {}; }
  static constexpr InputSelector input(unsigned i) noexcept {
    return {SelectorKind::PrimaryInput, static_cast<std::uint8_t>(i)};
  }
  static constexpr InputSelector cell(unsigned i) noexcept {
    return {SelectorKind::CellOutput, static_cast<std::uint8_t>(i)};
  }
  static constexpr InputSelector constant() noexcept { return {SelectorKind::Constant, 0}; }

  constexpr bool used() const noexcept { return kind != SelectorKind::Unused; }

  friend constexpr bool operator==(const InputSelector&, const InputSelector&) = default;
};

inline std::string to_string(const InputSelector& s) {
  switch (s.kind) {
    case SelectorKind::Unused: return "-";
    case SelectorKind::PrimaryInput: return "in" + std::to_string(s.index);
    case SelectorKind::CellOutput: return "fn" + std::to_string(s.index);
    case SelectorKind::Constant: return "imm";
  }
  return "?";
}

struct CellConfig {
  Opcode opcode = Opcode::Nop;
  std::array<InputSelector, 4> selectors{};
  std::int16_t immediate = 0;
  std::uint8_t delay_cycles = 0;
  bool output_enable = false;
  WidthMode width = WidthMode::Bit;

  const InputSelector& selector(Port p) const noexcept { return selectors[static_cast<unsigned>(p)]; }

  unsigned used_port_mask() const noexcept {
    unsigned mask = 0;
    for (unsigned i = 0; i < 4; ++i)
      if (selectors[i].used()) mask |= 1u << i;
    return mask;
  }

  friend bool operator==(const CellConfig&, const CellConfig&) = default;
};

enum class GeneticCodeErrorKind { Corrupted, Invalid, Malformed };

struct GeneticCodeError : Error {
  GeneticCodeErrorKind kind;
  GeneticCodeError(GeneticCodeErrorKind k, const std::string& what) : Error(what), kind(k) {}
};

// 66-bit packed configuration word.
//
//   65..61  opcode (5)
//   60..29  selectors N,W,E,S, 8 bits each: kind (2) | index (6)
//   28..13  immediate (16, two's complement)
//   12..5   delay cycles (8)
//   4       output enable
//   3..2    width mode
//   1       even parity over 65..34
//   0       even parity over 33..2
class GeneticCode {
 public:
  static constexpr unsigned kBits = 66;
  static constexpr unsigned kHexDigits = 17;

  constexpr GeneticCode() noexcept = default;
  constexpr GeneticCode(std::uint8_t high, std::uint64_t low) noexcept : hi_(high & 0x3), lo_(low) {}

  constexpr std::uint8_t high() const noexcept { return hi_; }
  constexpr std::uint64_t low() const noexcept { return lo_; }

  constexpr bool bit(unsigned i) const noexcept {
    return i < 64 ? ((lo_ >> i) & 1u) != 0 : ((hi_ >> (i - 64)) & 1u) != 0;
  }

  constexpr GeneticCode with_bit_flipped(unsigned i) const noexcept {
    GeneticCode g = *this;
    if (i < 64)
      g.lo_ ^= std::uint64_t{1} << i;
    else if (i < kBits)
      g.hi_ ^= static_cast<std::uint8_t>(1u << (i - 64));
    return g;
  }

  // Extracts `width` bits starting at `lsb` (width <= 32).
  constexpr std::uint32_t field(unsigned lsb, unsigned width) const noexcept {
    std::uint32_t v = 0;
    for (unsigned i = 0; i < width; ++i)
      if (bit(lsb + i)) v |= 1u << i;
    return v;
  }

  constexpr void set_field(unsigned lsb, unsigned width, std::uint32_t v) noexcept {
    for (unsigned i = 0; i < width; ++i) {
      const bool on = ((v >> i) & 1u) != 0;
      if (bit(lsb + i) != on) *this = with_bit_flipped(lsb + i);
    }
  }

  // Index of the most significant set bit plus one; 0 for the all-zero word.
  constexpr unsigned significant_bits() const noexcept {
    if (hi_ != 0) return 64 + static_cast<unsigned>(std::bit_width(static_cast<unsigned>(hi_)));
    return static_cast<unsigned>(std::bit_width(lo_));
  }

  std::string to_hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s(kHexDigits, '0');
    s[0] = kDigits[hi_ & 0x3];
    for (unsigned i = 0; i < 16; ++i) s[kHexDigits - 1 - i] = kDigits[(lo_ >> (4 * i)) & 0xF];
    return s;
  }

  static GeneticCode from_hex(std::string_view hex) {
    if (hex.size() != kHexDigits)
      throw GeneticCodeError(GeneticCodeErrorKind::Malformed,
                             "genetic code must be exactly 17 hex digits, got " + std::to_string(hex.size()));
    auto nibble = [](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      return -1;
    };
    std::uint64_t lo = 0;
    for (unsigned i = 1; i < kHexDigits; ++i) {
      const int n = nibble(hex[i]);
      if (n < 0) throw GeneticCodeError(GeneticCodeErrorKind::Malformed, "non-hex digit in genetic code");
      lo = (lo << 4) | static_cast<std::uint64_t>(n);
    }
    const int top = nibble(hex[0]);
    if (top < 0) throw GeneticCodeError(GeneticCodeErrorKind::Malformed, "non-hex digit in genetic code");
    if (top > 3)
      throw GeneticCodeError(GeneticCodeErrorKind::Malformed, "genetic code exceeds 66 bits (top digit > 3)");
    return GeneticCode(static_cast<std::uint8_t>(top), lo);
  }

  friend constexpr bool operator==(const GeneticCode&, const GeneticCode&) = default;

 private:
  std::uint8_t hi_ = 0;  // bits 65..64
  std::uint64_t lo_ = 0;  // bits 63..0
};

namespace layout {
inline constexpr unsigned kOpcodeLsb = 61, kOpcodeWidth = 5;
inline constexpr unsigned kSelectorLsb = 29;  // S at 29..36, E 37..44, W 45..52, N 53..60
inline constexpr unsigned kImmediateLsb = 13;
inline constexpr unsigned kDelayLsb = 5;
inline constexpr unsigned kOutputEnableBit = 4;
inline constexpr unsigned kWidthLsb = 2;
inline constexpr unsigned kParityHighBit = 1;  // covers 65..34
inline constexpr unsigned kParityLowBit = 0;   // covers 33..2

inline constexpr unsigned selector_lsb(Port p) noexcept {
  return kSelectorLsb + 8 * (3 - static_cast<unsigned>(p));
}
}  // namespace layout

inline bool group_parity(const GeneticCode& g, unsigned lsb, unsigned msb) noexcept {
  bool p = false;
  for (unsigned i = lsb; i <= msb; ++i) p ^= g.bit(i);
  return p;
}

inline void validate(const CellConfig& c) {
  if (!is_valid_opcode(static_cast<unsigned>(c.opcode))) throw ConfigError("opcode: reserved value");
  if (c.opcode == Opcode::Delay && c.delay_cycles < 1)
    throw ConfigError("delay_cycles: DELAY requires at least one stage");
  if (c.opcode != Opcode::Delay && c.delay_cycles != 0)
    throw ConfigError("delay_cycles: must be 0 for " + std::string(to_string(c.opcode)));
  for (unsigned i = 0; i < 4; ++i) {
    const auto& s = c.selectors[i];
    if (s.index > 63) throw ConfigError("selectors: index out of range on port " + std::string(to_string(kPorts[i])));
    if ((s.kind == SelectorKind::Unused || s.kind == SelectorKind::Constant) && s.index != 0)
      throw ConfigError("selectors: index must be 0 for unused/constant port " +
                        std::string(to_string(kPorts[i])));
  }
}

inline GeneticCode encode_genetic(const CellConfig& c) {
  validate(c);
  using namespace layout;
  GeneticCode g;
  g.set_field(kOpcodeLsb, kOpcodeWidth, static_cast<std::uint32_t>(c.opcode));
  for (Port p : kPorts) {
    const auto& s = c.selector(p);
    g.set_field(selector_lsb(p), 6, s.index);
    g.set_field(selector_lsb(p) + 6, 2, static_cast<std::uint32_t>(s.kind));
  }
  g.set_field(kImmediateLsb, 16, static_cast<std::uint16_t>(c.immediate));
  g.set_field(kDelayLsb, 8, c.delay_cycles);
  g.set_field(kOutputEnableBit, 1, c.output_enable ? 1 : 0);
  g.set_field(kWidthLsb, 2, static_cast<std::uint32_t>(c.width));
  g.set_field(kParityHighBit, 1, group_parity(g, 34, 65) ? 1 : 0);
  g.set_field(kParityLowBit, 1, group_parity(g, 2, 33) ? 1 : 0);
  return g;
}

inline CellConfig decode_genetic(const GeneticCode& g) {
  using namespace layout;
  if (group_parity(g, 34, 65) != g.bit(kParityHighBit))
    throw GeneticCodeError(GeneticCodeErrorKind::Corrupted, "corrupted genetic code: parity error in bits 65..34");
  if (group_parity(g, 2, 33) != g.bit(kParityLowBit))
    throw GeneticCodeError(GeneticCodeErrorKind::Corrupted, "corrupted genetic code: parity error in bits 33..2");

  const unsigned raw_op = g.field(kOpcodeLsb, kOpcodeWidth);
  if (!is_valid_opcode(raw_op))
    throw GeneticCodeError(GeneticCodeErrorKind::Invalid, "invalid genetic code: reserved opcode " + std::to_string(raw_op));
  const unsigned raw_width = g.field(kWidthLsb, 2);
  if (raw_width > 1)
    throw GeneticCodeError(GeneticCodeErrorKind::Invalid,
                           "invalid genetic code: reserved width mode " + std::to_string(raw_width));

  CellConfig c;
  c.opcode = static_cast<Opcode>(raw_op);
  for (Port p : kPorts) {
    auto& s = c.selectors[static_cast<unsigned>(p)];
    s.index = static_cast<std::uint8_t>(g.field(selector_lsb(p), 6));
    s.kind = static_cast<SelectorKind>(g.field(selector_lsb(p) + 6, 2));
  }
  c.immediate = static_cast<std::int16_t>(static_cast<std::uint16_t>(g.field(kImmediateLsb, 16)));
  c.delay_cycles = static_cast<std::uint8_t>(g.field(kDelayLsb, 8));
  c.output_enable = g.bit(kOutputEnableBit);
  c.width = static_cast<WidthMode>(raw_width);
  try {
    validate(c);
  } catch (const ConfigError& e) {
    throw GeneticCodeError(GeneticCodeErrorKind::Invalid, std::string("invalid genetic code: ") + e.what());
  }
  return c;
}

inline std::string describe(const CellConfig& c) {
  std::ostringstream os;
  os << "opcode=" << to_string(c.opcode);
  for (Port p : kPorts) os << ' ' << to_string(p) << '=' << to_string(c.selector(p));
  os << " imm=" << c.immediate << " delay=" << static_cast<unsigned>(c.delay_cycles)
     << " oe=" << (c.output_enable ? 1 : 0) << " width=" << to_string(c.width);
  return os.str();
}

}  // namespace selfheal
