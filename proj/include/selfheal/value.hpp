#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace selfheal {

using Nanos = std::int64_t;

// Base for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

enum class WidthMode : std::uint8_t { Bit = 0, Int16 = 1 };

inline constexpr std::int32_t wrap16(std::int64_t x) noexcept {
  return static_cast<std::int16_t>(static_cast<std::uint16_t>(x & 0xFFFF));
}

// A signal value on a cell port. BIT payloads are 0/1, INT16 payloads wrap
// two's-complement at 16 bits.
struct Value {
  WidthMode width = WidthMode::Bit;
  std::int32_t payload = 0;

  static constexpr Value bit(std::int64_t v) noexcept {
    return {WidthMode::Bit, static_cast<std::int32_t>(v & 1)};
  }
  static constexpr Value int16(std::int64_t v) noexcept {
    return {WidthMode::Int16, wrap16(v)};
  }
  static constexpr Value of(WidthMode w, std::int64_t v) noexcept {
    return w == WidthMode::Bit ? bit(v) : int16(v);
  }

  // Applies an XOR mask, keeping the result inside the value's width.
  constexpr Value flipped(std::int64_t mask) const noexcept {
    return of(width, payload ^ mask);
  }

  friend constexpr bool operator==(const Value&, const Value&) = default;
};

inline std::string_view to_string(WidthMode w) noexcept {
  return w == WidthMode::Bit ? "bit" : "int16";
}

inline std::optional<WidthMode> parse_width(std::string_view s) noexcept {
  if (s == "bit") return WidthMode::Bit;
  if (s == "int16") return WidthMode::Int16;
  return std::nullopt;
}

enum class Opcode : std::uint8_t {
  Nop = 0,
  And = 1,
  Or = 2,
  Not = 3,
  Add = 4,
  Sub = 5,
  Mul = 6,
  Cmp = 7,
  Delay = 8,
  Mux = 9,
};

inline constexpr unsigned kOpcodeCount = 10;

inline constexpr bool is_valid_opcode(unsigned raw) noexcept { return raw < kOpcodeCount; }

inline std::string_view to_string(Opcode op) noexcept {
  switch (op) {
    case Opcode::Nop: return "NOP";
    case Opcode::And: return "AND";
    case Opcode::Or: return "OR";
    case Opcode::Not: return "NOT";
    case Opcode::Add: return "ADD";
    case Opcode::Sub: return "SUB";
    case Opcode::Mul: return "MUL";
    case Opcode::Cmp: return "CMP";
    case Opcode::Delay: return "DELAY";
    case Opcode::Mux: return "MUX";
  }
  return "?";
}

inline std::optional<Opcode> parse_opcode(std::string_view s) noexcept {
  for (unsigned i = 0; i < kOpcodeCount; ++i) {
    auto op = static_cast<Opcode>(i);
    if (to_string(op) == s) return op;
  }
  return std::nullopt;
}

struct Arity {
  unsigned min;
  unsigned max;
};

inline constexpr Arity arity(Opcode op) noexcept {
  switch (op) {
    case Opcode::Nop: return {0, 0};
    case Opcode::Not: return {1, 1};
    case Opcode::Delay: return {1, 1};
    case Opcode::And:
    case Opcode::Or:
    case Opcode::Add: return {2, 4};
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::Cmp: return {2, 2};
    case Opcode::Mux: return {3, 3};
  }
  return {0, 0};
}

}  // namespace selfheal
