#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "einsel/detail/stats.hpp"
#include "einsel/photon/models.hpp"

namespace einsel::photon {

inline constexpr std::size_t kMinWaitingEvents = 100;
inline constexpr std::size_t kMinCountingWindows = 50;
inline constexpr std::size_t kMinG2Events = 10000;
inline constexpr double kKsSignificance = 0.01;

// ---------------------------------------------------------------- waiting times

struct WaitingTimeReport {
  std::uint32_t detector = 0;
  std::size_t gaps = 0;
  double rate = 0.0;          // maximum-likelihood exponential rate (1/s)
  double ks_distance = 0.0;
  double ks_critical = 0.0;   // at kKsSignificance
  double ks_p_value = 1.0;
  bool exponential = true;    // ks_p_value > kKsSignificance
  std::vector<double> bin_edges;   // seconds
  std::vector<std::size_t> counts;
};

inline WaitingTimeReport waiting_times(const ClickStream& stream, std::uint32_t detector, std::size_t bins = 50) {
  const auto t = stream.times(detector);
  if (t.size() < kMinWaitingEvents)
    throw ValidationError("waiting_times needs at least " + std::to_string(kMinWaitingEvents) + " events on detector " +
                          std::to_string(detector) + ", got " + std::to_string(t.size()));
  std::vector<double> gaps(t.size() - 1);
  double sum = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) sum += gaps[i - 1] = static_cast<double>(t[i] - t[i - 1]) * 1e-9;
  std::sort(gaps.begin(), gaps.end());

  WaitingTimeReport r;
  r.detector = detector;
  r.gaps = gaps.size();
  r.rate = static_cast<double>(gaps.size()) / sum;
  r.ks_distance = einsel::detail::ks_distance(gaps, [rate = r.rate](double x) { return 1.0 - std::exp(-rate * x); });
  r.ks_critical = einsel::detail::ks_critical_value(gaps.size(), kKsSignificance);
  r.ks_p_value = einsel::detail::ks_p_value(r.ks_distance, gaps.size());
  r.exponential = r.ks_p_value > kKsSignificance;

  bins = std::max<std::size_t>(bins, 1);
  const double width = gaps.back() > 0.0 ? gaps.back() / static_cast<double>(bins) : 1e-9;
  r.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) r.bin_edges[i] = width * static_cast<double>(i);
  r.counts.assign(bins, 0);
  for (double g : gaps) ++r.counts[std::min(bins - 1, static_cast<std::size_t>(g / width))];
  return r;
}

// ----------------------------------------------------------- counting statistics

struct CountingStats {
  double window = 0.0;
  std::size_t windows = 0;
  double mean = 0.0;
  double variance = 0.0;
  double fano = 0.0;
  double mandel_q = 0.0;
  double mandel_q_stderr = 0.0;
  einsel::detail::ChiSquare poisson_chi2;
  std::vector<std::size_t> histogram;  // histogram[k] = number of windows with k counts
};

/// Counts per consecutive window of all detectors (or just `detector`).
inline CountingStats counting_stats(const ClickStream& stream, double window,
                                    std::optional<std::uint32_t> detector = std::nullopt) {
  if (!(window > 0.0)) throw ValidationError("counting window must be > 0");
  const auto m = static_cast<std::size_t>(std::floor(stream.duration / window));
  if (m < kMinCountingWindows)
    throw ValidationError("counting window larger than duration/" + std::to_string(kMinCountingWindows));

  std::vector<std::size_t> per_window(m, 0);
  for (const auto& e : stream.events) {
    if (detector && e.detector != *detector) continue;
    const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(e.time_ns) * 1e-9 / window));
    if (k < m) ++per_window[k];
  }

  CountingStats s;
  s.window = window;
  s.windows = m;
  const double md = static_cast<double>(m);
  double sum = 0.0;
  for (auto c : per_window) sum += static_cast<double>(c);
  s.mean = sum / md;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (auto c : per_window) {
    const double d = static_cast<double>(c) - s.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  s.variance = m2 / (md - 1.0);
  m2 /= md;
  m3 /= md;
  m4 /= md;
  if (s.mean > 0.0) {
    s.fano = s.variance / s.mean;
    s.mandel_q = s.fano - 1.0;
    // delta method for s²/x̄ including the mean/variance covariance
    const double mu = s.mean;
    const double var_q = ((m4 - m2 * m2) / (mu * mu) - 2.0 * m2 * m3 / (mu * mu * mu) + m2 * m2 * m2 / (mu * mu * mu * mu)) / md;
    s.mandel_q_stderr = std::sqrt(std::max(var_q, 0.0));
  }

  const std::size_t kmax = *std::max_element(per_window.begin(), per_window.end());
  s.histogram.assign(kmax + 1, 0);
  for (auto c : per_window) ++s.histogram[c];
  s.poisson_chi2 = einsel::detail::poisson_chi_square(s.histogram, s.mean);
  return s;
}

// ------------------------------------------------------------------------- g2

struct G2Options {
  double bin_width = 1e-6;  // seconds
  double max_lag = 1e-5;    // seconds; grid is symmetric, k·bin_width for |k| ≤ round(max_lag/bin_width)
  std::uint32_t detector_a = 0;
  std::uint32_t detector_b = 1;
};

struct G2Curve {
  std::vector<double> lags;
  std::vector<double> g2;
  std::vector<double> standard_error;
  std::vector<std::size_t> coincidences;
  double bin_width = 0.0;
  double rate_a = 0.0;
  double rate_b = 0.0;

  std::size_t zero_index() const { return lags.size() / 2; }
  double at_zero() const { return g2[zero_index()]; }
  double stderr_at_zero() const { return standard_error[zero_index()]; }
};

namespace detail {

inline void require_two_detectors(const ClickStream& stream, std::uint32_t a, std::uint32_t b) {
  const auto ids = stream.detector_ids();
  if (!ids.contains(a) || !ids.contains(b) || a == b)
    throw ValidationError("two-detector estimator needs events on detectors " + std::to_string(a) + " and " +
                          std::to_string(b));
}

}  // namespace detail

/// Binned cross-correlation of detectors a and b: coincidences at lag τ = t_b − t_a
/// divided by r_a r_b w (T − |τ|). Standard errors from Poisson bin counts.
inline G2Curve g2(const ClickStream& stream, const G2Options& opt = {}) {
  if (!(opt.bin_width > 0.0) || !(opt.max_lag >= 0.0)) throw ValidationError("g2 needs bin_width > 0 and max_lag >= 0");
  detail::require_two_detectors(stream, opt.detector_a, opt.detector_b);
  if (stream.events.size() < kMinG2Events)
    throw ValidationError("g2 needs at least " + std::to_string(kMinG2Events) + " events");

  const auto ta = stream.times(opt.detector_a);
  const auto tb = stream.times(opt.detector_b);
  const double w = opt.bin_width;
  const auto k_max = static_cast<long>(std::llround(opt.max_lag / w));
  const auto nbins = static_cast<std::size_t>(2 * k_max + 1);
  const double reach = (static_cast<double>(k_max) + 0.5) * w;
  const double T = stream.duration;
  if (2.0 * reach >= T) throw ValidationError("g2 lag window exceeds stream duration");

  std::vector<std::size_t> counts(nbins, 0);
  std::size_t start = 0;
  for (auto a : ta) {
    const double t0 = static_cast<double>(a) * 1e-9;
    while (start < tb.size() && static_cast<double>(tb[start]) * 1e-9 < t0 - reach) ++start;
    for (std::size_t j = start; j < tb.size(); ++j) {
      const double d = static_cast<double>(tb[j]) * 1e-9 - t0;
      if (d >= reach) break;
      const auto bin = static_cast<long>(std::floor((d + reach) / w));
      if (bin >= 0 && bin < static_cast<long>(nbins)) ++counts[static_cast<std::size_t>(bin)];
    }
  }

  G2Curve c;
  c.bin_width = w;
  c.rate_a = static_cast<double>(ta.size()) / T;
  c.rate_b = static_cast<double>(tb.size()) / T;
  c.coincidences = counts;
  for (std::size_t i = 0; i < nbins; ++i) {
    const double lag = static_cast<double>(static_cast<long>(i) - k_max) * w;
    const double expected = c.rate_a * c.rate_b * w * (T - std::abs(lag));
    const double n = static_cast<double>(counts[i]);
    c.lags.push_back(lag);
    c.g2.push_back(n / expected);
    c.standard_error.push_back(std::sqrt(std::max(n, 1.0)) / expected);
  }
  return c;
}

// --------------------------------------------------------------- coincidences

struct CoincidenceReport {
  double window = 0.0;
  std::size_t raw = 0;       // pairs with |t_b − t_a| ≤ window/2
  double accidental = 0.0;   // r_a r_b window T
  double corrected = 0.0;    // max(0, raw − accidental)
  bool floored = false;      // raw − accidental was negative
  bool correction_dominates = false;  // accidental > raw/2
};

inline CoincidenceReport coincidences(const ClickStream& stream, double window, std::uint32_t detector_a = 0,
                                      std::uint32_t detector_b = 1) {
  CoincidenceReport r;
  r.window = window;
  if (stream.events.empty() || !(stream.duration > 0.0)) return r;
  const auto ta = stream.times(detector_a);
  const auto tb = stream.times(detector_b);
  const auto half = static_cast<std::uint64_t>(std::floor(window * 0.5e9));
  std::size_t start = 0;
  for (auto a : ta) {
    while (start < tb.size() && tb[start] + half < a) ++start;
    for (std::size_t j = start; j < tb.size() && tb[j] <= a + half; ++j) ++r.raw;
  }
  const double T = stream.duration;
  r.accidental = static_cast<double>(ta.size()) * static_cast<double>(tb.size()) * window / T;
  const double diff = static_cast<double>(r.raw) - r.accidental;
  r.floored = diff < 0.0;
  r.corrected = std::max(diff, 0.0);
  r.correction_dominates = r.accidental > 0.5 * static_cast<double>(r.raw);
  return r;
}

}  // namespace einsel::photon
