#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "einsel/core/types.hpp"

namespace einsel::photon {

enum class SourceKind { kCoherent, kThermal, kSingleEmitter, kPairSource };

inline const char* to_string(SourceKind k) {
  switch (k) {
    case SourceKind::kCoherent: return "coherent";
    case SourceKind::kThermal: return "thermal";
    case SourceKind::kSingleEmitter: return "single_emitter";
    case SourceKind::kPairSource: return "pair_source";
  }
  return "?";
}

inline SourceKind source_kind_from_string(const std::string& s) {
  if (s == "coherent") return SourceKind::kCoherent;
  if (s == "thermal") return SourceKind::kThermal;
  if (s == "single_emitter") return SourceKind::kSingleEmitter;
  if (s == "pair_source") return SourceKind::kPairSource;
  throw ValidationError("unknown source kind '" + s + "'");
}

/// Photon source. `mean_rate` is the emission rate (photons, or pairs for a
/// pair source, per second) before any detector losses.
struct SourceModel {
  SourceKind kind = SourceKind::kCoherent;
  double mean_rate = 1.0;
  std::optional<double> coherence_time;    // thermal: field coherence time (s)
  std::optional<double> emitter_lifetime;  // single_emitter: radiative lifetime (s)
  std::optional<DensityMatrix> pair_state; // pair_source: polarization state of each pair

  static SourceModel coherent(double rate) { return {SourceKind::kCoherent, rate, {}, {}, {}}; }
  static SourceModel thermal(double rate, double coherence_time) {
    return {SourceKind::kThermal, rate, coherence_time, {}, {}};
  }
  static SourceModel single_emitter(double rate, double lifetime) {
    return {SourceKind::kSingleEmitter, rate, {}, lifetime, {}};
  }
  static SourceModel pair_source(double pair_rate, DensityMatrix state) {
    return {SourceKind::kPairSource, pair_rate, {}, {}, std::move(state)};
  }

  void validate() const {
    if (!(mean_rate > 0.0) || !std::isfinite(mean_rate)) throw ValidationError("source mean_rate must be > 0");
    const bool thermal = kind == SourceKind::kThermal;
    const bool single = kind == SourceKind::kSingleEmitter;
    const bool pair = kind == SourceKind::kPairSource;
    if (coherence_time.has_value() != thermal)
      throw ValidationError("coherence_time is required for, and only for, thermal sources");
    if (emitter_lifetime.has_value() != single)
      throw ValidationError("emitter_lifetime is required for, and only for, single_emitter sources");
    if (pair_state.has_value() != pair) throw ValidationError("pair_state is required for, and only for, pair sources");
    if (thermal && !(*coherence_time > 0.0)) throw ValidationError("coherence_time must be > 0");
    if (single) {
      if (!(*emitter_lifetime > 0.0)) throw ValidationError("emitter_lifetime must be > 0");
      if (*emitter_lifetime >= 1.0 / mean_rate)
        throw ValidationError("emitter_lifetime must be shorter than the mean emission interval 1/mean_rate");
    }
    if (pair && (pair_state->dims() != Dims{2, 2})) throw ValidationError("pair_state must be a two-qubit state");
  }
};

struct DetectorModel {
  double efficiency = 1.0;
  double dark_rate = 0.0;  // counts per second
  double dead_time = 0.0;  // seconds

  void validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw ValidationError("detector efficiency must lie in [0,1]");
    if (!(dark_rate >= 0.0)) throw ValidationError("dark_rate must be >= 0");
    if (!(dead_time >= 0.0)) throw ValidationError("dead_time must be >= 0");
  }
};

struct ClickEvent {
  std::uint64_t time_ns;
  std::uint32_t detector;

  friend bool operator==(const ClickEvent&, const ClickEvent&) = default;
  friend auto operator<=>(const ClickEvent&, const ClickEvent&) = default;
};

/// Time-ordered detector clicks. Timestamps are integer nanoseconds.
struct ClickStream {
  std::vector<ClickEvent> events;
  double duration = 0.0;  // seconds
  std::uint64_t seed = 0;
  std::map<std::string, std::string> metadata;

  std::uint64_t duration_ns() const { return static_cast<std::uint64_t>(std::llround(duration * 1e9)); }

  std::set<std::uint32_t> detector_ids() const {
    std::set<std::uint32_t> ids;
    for (const auto& e : events) ids.insert(e.detector);
    return ids;
  }

  std::vector<std::uint64_t> times(std::uint32_t detector) const {
    std::vector<std::uint64_t> t;
    for (const auto& e : events)
      if (e.detector == detector) t.push_back(e.time_ns);
    return t;
  }

  std::size_t count(std::uint32_t detector) const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [&](const ClickEvent& e) { return e.detector == detector; }));
  }

  /// Checks global ordering, per-detector strict monotonicity and the
  /// [0, duration] range; throws ValidationError on the first violation.
  void validate() const {
    if (!(duration >= 0.0)) throw ValidationError("negative stream duration");
    std::map<std::uint32_t, std::uint64_t> last;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& e = events[i];
      if (i > 0 && e < events[i - 1]) throw ValidationError("events not time-ordered at index " + std::to_string(i));
      if (e.time_ns > duration_ns()) throw ValidationError("event beyond stream duration at index " + std::to_string(i));
      auto it = last.find(e.detector);
      if (it != last.end() && e.time_ns <= it->second)
        throw ValidationError("non-increasing timestamp on detector " + std::to_string(e.detector));
      last[e.detector] = e.time_ns;
    }
  }
};

}  // namespace einsel::photon
