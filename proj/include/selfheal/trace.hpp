#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selfheal/timing.hpp"
#include "selfheal/value.hpp"

namespace selfheal {

inline constexpr std::string_view kToolVersion = "0.3.0";

enum class Annotation { Data, MaskedTransient, Mismatch, SyndromeAction, Alarm, Injection };

inline std::string_view to_string(Annotation a) noexcept {
  switch (a) {
    case Annotation::Data: return "data";
    case Annotation::MaskedTransient: return "masked_transient";
    case Annotation::Mismatch: return "mismatch";
    case Annotation::SyndromeAction: return "syndrome_action";
    case Annotation::Alarm: return "alarm";
    case Annotation::Injection: return "injection";
  }
  return "?";
}

inline Annotation parse_annotation(std::string_view s) {
  for (auto a : {Annotation::Data, Annotation::MaskedTransient, Annotation::Mismatch, Annotation::SyndromeAction,
                 Annotation::Alarm, Annotation::Injection})
    if (to_string(a) == s) return a;
  throw ConfigError("unknown trace annotation '" + std::string(s) + "'");
}

enum class SignalRole { PrimaryInput, PrimaryOutput, Internal };

struct SignalInfo {
  std::string name;
  WidthMode width = WidthMode::Bit;
  SignalRole role = SignalRole::Internal;

  friend bool operator==(const SignalInfo&, const SignalInfo&) = default;
};

struct TraceRecord {
  Nanos time = 0;
  std::uint32_t signal = 0;
  std::int32_t value = 0;
  Annotation annotation = Annotation::Data;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

class Trace {
 public:
  std::string scenario;
  TimingParams timing;
  std::vector<SignalInfo> signals;
  std::vector<TraceRecord> records;

  std::uint32_t intern(std::string_view name, WidthMode w = WidthMode::Bit, SignalRole role = SignalRole::Internal) {
    if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(signals.size());
    signals.push_back({std::string(name), w, role});
    index_.emplace(std::string(name), id);
    return id;
  }

  std::optional<std::uint32_t> find(std::string_view name) const {
    if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
    return std::nullopt;
  }

  void add(Nanos t, std::uint32_t signal, std::int32_t value, Annotation a) {
    if (!records.empty() && t < records.back().time) throw Error("trace records must be time-ordered");
    records.push_back({t, signal, value, a});
  }

  const std::string& name_of(std::uint32_t id) const { return signals.at(id).name; }

  // Data samples of one signal in time order.
  std::vector<TraceRecord> samples(std::string_view name) const {
    std::vector<TraceRecord> out;
    const auto id = find(name);
    if (!id) return out;
    for (const auto& r : records)
      if (r.signal == *id && r.annotation == Annotation::Data) out.push_back(r);
    return out;
  }

  std::vector<std::string> output_names() const {
    std::vector<std::string> out;
    for (const auto& s : signals)
      if (s.role == SignalRole::PrimaryOutput) out.push_back(s.name);
    return out;
  }

 private:
  std::map<std::string, std::uint32_t> index_;
};

}  // namespace selfheal
