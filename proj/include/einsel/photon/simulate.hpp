#pragma once

// Monte Carlo click streams for the four source kinds seen through a 50/50
// splitter (or, for pair sources, one photon per arm) onto two detectors.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "einsel/core/random.hpp"
#include "einsel/photon/models.hpp"

namespace einsel::photon {

namespace detail {

// Substream indices under the run seed.
inline constexpr std::uint64_t kSourceStream = 0;
inline constexpr std::uint64_t kThinningStream = 1;  // + detector id
inline constexpr std::uint64_t kDarkStream = 3;      // + detector id

inline constexpr double kThermalStepsPerCoherenceTime = 100.0;
inline constexpr double kMaxThermalSteps = 2e8;

using Arms = std::array<std::vector<double>, 2>;

inline void poisson_times(double rate, double duration, Rng& rng, std::vector<double>& out) {
  std::exponential_distribution<double> gap(rate);
  for (double t = gap(rng); t < duration; t += gap(rng)) out.push_back(t);
}

inline Arms split_5050(const std::vector<double>& photons, Rng& rng) {
  Arms arms;
  std::bernoulli_distribution coin(0.5);
  for (double t : photons) arms[coin(rng) ? 1 : 0].push_back(t);
  return arms;
}

inline Arms coherent_arrivals(const SourceModel& src, double duration, Rng& rng) {
  std::vector<double> photons;
  poisson_times(src.mean_rate, duration, rng, photons);
  return split_5050(photons, rng);
}

// Doubly stochastic Poisson process driven by |E(t)|², E a unit-power complex
// Ornstein-Uhlenbeck field with correlation time τ_c; g2(τ) = 1 + e^{−2|τ|/τ_c}.
inline Arms thermal_arrivals(const SourceModel& src, double duration, Rng& rng) {
  const double tau = *src.coherence_time;
  const double steps_wanted = std::ceil(duration / tau * kThermalStepsPerCoherenceTime);
  if (steps_wanted > kMaxThermalSteps) throw ValidationError("thermal source: duration/coherence_time too large to sample");
  const auto steps = static_cast<std::size_t>(std::max(1.0, steps_wanted));
  const double dt = duration / static_cast<double>(steps);
  const double rho = std::exp(-dt / tau);
  const double kick = std::sqrt((1.0 - rho * rho) / 2.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  cplx field(gauss(rng) * std::sqrt(0.5), gauss(rng) * std::sqrt(0.5));
  std::vector<double> photons;
  for (std::size_t k = 0; k < steps; ++k) {
    const double mean = src.mean_rate * std::norm(field) * dt;
    const long n = mean > 0.0 ? std::poisson_distribution<long>(mean)(rng) : 0;
    const double t0 = static_cast<double>(k) * dt;
    const auto first = photons.size();
    for (long i = 0; i < n; ++i) photons.push_back(t0 + unit(rng) * dt);
    std::sort(photons.begin() + static_cast<std::ptrdiff_t>(first), photons.end());
    const double re = gauss(rng), im = gauss(rng);
    field = rho * field + kick * cplx(re, im);
  }
  return split_5050(photons, rng);
}

// Renewal process: after each emission the emitter waits for re-excitation
// (exponential, mean 1/rate − lifetime) and then decays (exponential, mean lifetime).
inline Arms single_emitter_arrivals(const SourceModel& src, double duration, Rng& rng) {
  const double lifetime = *src.emitter_lifetime;
  std::exponential_distribution<double> excite(1.0 / (1.0 / src.mean_rate - lifetime));
  std::exponential_distribution<double> decay(1.0 / lifetime);
  std::vector<double> photons;
  for (double t = excite(rng) + decay(rng); t < duration; t += excite(rng) + decay(rng)) photons.push_back(t);
  return split_5050(photons, rng);
}

inline Arms pair_arrivals(const SourceModel& src, double duration, Rng& rng) {
  std::vector<double> pairs;
  poisson_times(src.mean_rate, duration, rng, pairs);
  return {pairs, pairs};
}

// Efficiency thinning, dark counts, nanosecond quantization and dead time.
inline std::vector<std::uint64_t> detect(const std::vector<double>& arrivals, const DetectorModel& det, double duration,
                                         std::uint64_t seed, std::uint32_t id) {
  Rng thin = make_rng(seed, kThinningStream + id);
  Rng dark = make_rng(seed, kDarkStream + id);
  std::bernoulli_distribution keep(det.efficiency);
  std::vector<double> hits;
  hits.reserve(arrivals.size());
  for (double t : arrivals)
    if (keep(thin)) hits.push_back(t);
  if (det.dark_rate > 0.0) {
    poisson_times(det.dark_rate, duration, dark, hits);
    std::sort(hits.begin(), hits.end());
  }
  const auto dead_ns = static_cast<std::uint64_t>(std::llround(det.dead_time * 1e9));
  const auto end_ns = static_cast<std::uint64_t>(std::llround(duration * 1e9));
  std::vector<std::uint64_t> out;
  out.reserve(hits.size());
  for (double t : hits) {
    const auto ns = std::min(static_cast<std::uint64_t>(std::floor(t * 1e9)), end_ns);
    if (!out.empty() && (ns <= out.back() || ns - out.back() < dead_ns)) continue;
    out.push_back(ns);
  }
  return out;
}

}  // namespace detail

/// Two-detector click stream, fully determined by (source, detectors, duration, seed).
inline ClickStream simulate_clicks(const SourceModel& source, const std::array<DetectorModel, 2>& detectors,
                                   double duration, std::uint64_t seed) {
  source.validate();
  for (const auto& d : detectors) d.validate();
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ValidationError("duration must be > 0");

  Rng rng = make_rng(seed, detail::kSourceStream);
  detail::Arms arms;
  switch (source.kind) {
    case SourceKind::kCoherent: arms = detail::coherent_arrivals(source, duration, rng); break;
    case SourceKind::kThermal: arms = detail::thermal_arrivals(source, duration, rng); break;
    case SourceKind::kSingleEmitter: arms = detail::single_emitter_arrivals(source, duration, rng); break;
    case SourceKind::kPairSource: arms = detail::pair_arrivals(source, duration, rng); break;
  }

  ClickStream stream;
  stream.duration = duration;
  stream.seed = seed;
  stream.metadata["source"] = to_string(source.kind);
  for (std::uint32_t id = 0; id < 2; ++id)
    for (auto ns : detail::detect(arms[id], detectors[id], duration, seed, id)) stream.events.push_back({ns, id});
  std::sort(stream.events.begin(), stream.events.end());
  return stream;
}

}  // namespace einsel::photon
