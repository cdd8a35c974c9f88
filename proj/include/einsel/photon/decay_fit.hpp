#pragma once

// Least-squares comparison of decay laws for an intensity series:
//   exponential   I0 exp(-t/tau)
//   hyperbolic    I0 / (1 + t/tau)^p
// each optionally multiplied by (1 + m cos(Omega t + phi)). Ranked by AIC.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "einsel/core/random.hpp"
#include "einsel/detail/minimize.hpp"

namespace einsel::photon {

enum class DecayModel { kExponential, kHyperbolic, kExponentialModulated, kHyperbolicModulated };

inline const char* to_string(DecayModel m) {
  switch (m) {
    case DecayModel::kExponential: return "exponential";
    case DecayModel::kHyperbolic: return "hyperbolic";
    case DecayModel::kExponentialModulated: return "exponential_modulated";
    case DecayModel::kHyperbolicModulated: return "hyperbolic_modulated";
  }
  return "?";
}

inline bool is_hyperbolic(DecayModel m) {
  return m == DecayModel::kHyperbolic || m == DecayModel::kHyperbolicModulated;
}
inline bool is_modulated(DecayModel m) {
  return m == DecayModel::kExponentialModulated || m == DecayModel::kHyperbolicModulated;
}

/// Natural parameters; p is ignored for exponential laws, m/omega/phi for unmodulated ones.
struct DecayParams {
  double i0 = 1.0;
  double tau = 1.0;
  double p = 1.0;
  double m = 0.0;
  double omega = 0.0;
  double phi = 0.0;
};

inline std::size_t parameter_count(DecayModel m) { return 2 + (is_hyperbolic(m) ? 1 : 0) + (is_modulated(m) ? 3 : 0); }

inline double decay_value(DecayModel model, const DecayParams& q, double t) {
  double v = is_hyperbolic(model) ? q.i0 * std::pow(1.0 + t / q.tau, -q.p) : q.i0 * std::exp(-t / q.tau);
  if (is_modulated(model)) v *= 1.0 + q.m * std::cos(q.omega * t + q.phi);
  return v;
}

struct DecaySeries {
  std::vector<double> t;
  std::vector<double> counts;
};

struct ModelFit {
  DecayModel model = DecayModel::kExponential;
  DecayParams params;
  double sse = std::numeric_limits<double>::infinity();
  double aic = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::vector<double> residuals;
};

struct DecayFitReport {
  std::vector<ModelFit> fits;  // ascending AIC
  bool indeterminate = false;  // constant data, or best fit changes by < flat_tolerance across the series

  const ModelFit& best() const { return fits.front(); }
  const ModelFit& fit(DecayModel m) const {
    for (const auto& f : fits)
      if (f.model == m) return f;
    throw ValidationError(std::string("model not fitted: ") + to_string(m));
  }
};

struct DecayFitOptions {
  // AIC does not charge for the frequency search, so on pure noise the
  // modulated laws win too often; they are fitted only on request.
  bool include_modulated = false;
  double flat_tolerance = 0.01;
};

namespace detail {

// Unconstrained coordinates: ln i0, ln tau, [ln p], [logit m, logit(omega/omega_max), phi].
// omega_max is the Nyquist frequency of the sampling grid, which removes aliases.
inline DecayParams unpack(DecayModel model, const std::vector<double>& x, double omega_max) {
  DecayParams q;
  std::size_t k = 0;
  q.i0 = std::exp(x[k++]);
  q.tau = std::exp(x[k++]);
  if (is_hyperbolic(model)) q.p = std::exp(x[k++]);
  if (is_modulated(model)) {
    q.m = 1.0 / (1.0 + std::exp(-x[k++]));
    q.omega = omega_max / (1.0 + std::exp(-x[k++]));
    q.phi = x[k++];
  }
  return q;
}

inline std::vector<double> pack(DecayModel model, const DecayParams& q, double omega_max) {
  std::vector<double> x{std::log(q.i0), std::log(q.tau)};
  if (is_hyperbolic(model)) x.push_back(std::log(q.p));
  if (is_modulated(model)) {
    x.push_back(std::log(q.m / (1.0 - q.m)));
    x.push_back(std::log(q.omega / (omega_max - q.omega)));
    x.push_back(q.phi);
  }
  return x;
}

inline double sse(DecayModel model, const DecayParams& q, const DecaySeries& s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    const double r = s.counts[i] - decay_value(model, q, s.t[i]);
    acc += r * r;
  }
  return acc;
}

inline ModelFit fit_one(DecayModel model, const DecaySeries& s, const std::vector<DecayParams>& starts,
                        double omega_max) {
  ModelFit best;
  best.model = model;
  const auto objective = [&](const std::vector<double>& x) { return sse(model, unpack(model, x, omega_max), s); };
  for (const auto& start : starts) {
    const auto x0 = pack(model, start, omega_max);
    auto r = einsel::detail::nelder_mead(objective, x0, std::vector<double>(x0.size(), 0.5));
    // one restart from the optimum to escape early simplex collapse
    r = einsel::detail::nelder_mead(objective, r.x, std::vector<double>(x0.size(), 0.1));
    if (r.value < best.sse) {
      best.sse = r.value;
      best.params = unpack(model, r.x, omega_max);
      best.converged = r.converged;
    }
  }
  const double n = static_cast<double>(s.t.size());
  const double floor = std::numeric_limits<double>::min();
  best.aic = n * std::log(std::max(best.sse / n, floor)) + 2.0 * static_cast<double>(parameter_count(model));
  best.residuals.resize(s.t.size());
  for (std::size_t i = 0; i < s.t.size(); ++i) best.residuals[i] = s.counts[i] - decay_value(model, best.params, s.t[i]);
  return best;
}

/// Frequencies of the `count` largest local maxima of the residual periodogram,
/// scanned in half-cycle steps over the series span up to 0.95 omega_max.
inline std::vector<double> residual_peaks(const DecaySeries& s, const std::vector<double>& residuals, double span,
                                          double omega_max, std::size_t count) {
  const double step = std::numbers::pi / span;
  std::vector<double> omegas, power;
  for (double w = 2.0 * step; w < 0.95 * omega_max; w += step) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < s.t.size(); ++i) acc += residuals[i] * std::polar(1.0, -w * s.t[i]);
    omegas.push_back(w);
    power.push_back(std::norm(acc));
  }
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < power.size(); ++i) {
    const bool left = i == 0 || power[i] >= power[i - 1];
    const bool right = i + 1 == power.size() || power[i] >= power[i + 1];
    if (left && right) peaks.push_back(i);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return power[a] > power[b]; });
  std::vector<double> out;
  for (std::size_t i = 0; i < std::min(count, peaks.size()); ++i) out.push_back(omegas[peaks[i]]);
  if (out.empty()) out.push_back(std::min(2.0 * std::numbers::pi / span, 0.5 * omega_max));
  return out;
}

}  // namespace detail

/// Fits every model from a multi-start grid and ranks by AIC = n ln(SSE/n) + 2k.
/// Non-convergence is reported per model through ModelFit::converged.
inline DecayFitReport fit_decay(const DecaySeries& series, const DecayFitOptions& opt = {}) {
  if (series.t.size() != series.counts.size()) throw DimensionError("decay series: t and counts differ in length");
  if (series.t.size() < 10) throw ValidationError("decay fit needs at least 10 points");
  for (double c : series.counts)
    if (!(c >= 0.0)) throw ValidationError("decay counts must be >= 0");

  const auto [tmin_it, tmax_it] = std::minmax_element(series.t.begin(), series.t.end());
  const double span = std::max(*tmax_it - *tmin_it, 1e-12);
  const double peak = std::max(*std::max_element(series.counts.begin(), series.counts.end()), 1e-12);
  std::vector<double> sorted_t = series.t;
  std::sort(sorted_t.begin(), sorted_t.end());
  double min_step = span;
  for (std::size_t i = 1; i < sorted_t.size(); ++i)
    if (sorted_t[i] > sorted_t[i - 1]) min_step = std::min(min_step, sorted_t[i] - sorted_t[i - 1]);
  const double omega_max = std::numbers::pi / min_step;

  std::vector<DecayParams> exp_starts, hyp_starts;
  for (double f : {0.1, 0.3, 1.0, 3.0}) {
    exp_starts.push_back({peak, f * span});
    for (double p : {0.5, 1.0, 2.0, 4.0}) hyp_starts.push_back({peak, f * span, p});
  }

  DecayFitReport report;
  report.fits.push_back(detail::fit_one(DecayModel::kExponential, series, exp_starts, omega_max));
  report.fits.push_back(detail::fit_one(DecayModel::kHyperbolic, series, hyp_starts, omega_max));
  if (opt.include_modulated) {
    for (std::size_t base = 0; base < 2; ++base) {
      const auto model = base == 0 ? DecayModel::kExponentialModulated : DecayModel::kHyperbolicModulated;
      std::vector<DecayParams> starts;
      const auto& base_fit = report.fits[base];
      for (double omega : detail::residual_peaks(series, base_fit.residuals, span, omega_max, 3))
        for (double phi : {0.0, std::numbers::pi / 2.0, std::numbers::pi, 1.5 * std::numbers::pi}) {
          DecayParams q = base_fit.params;
          q.m = 0.2;
          q.omega = omega;
          q.phi = phi;
          starts.push_back(q);
        }
      report.fits.push_back(detail::fit_one(model, series, starts, omega_max));
    }
  }
  std::stable_sort(report.fits.begin(), report.fits.end(),
                   [](const ModelFit& a, const ModelFit& b) { return a.aic < b.aic; });

  const auto& b = report.best();
  const double first = decay_value(b.model, b.params, *tmin_it);
  const double last = decay_value(b.model, b.params, *tmax_it);
  const auto [lo, hi] = std::minmax_element(series.counts.begin(), series.counts.end());
  report.indeterminate = *lo == *hi || !(first > 0.0) || std::abs(last / first - 1.0) < opt.flat_tolerance;
  return report;
}

/// Poisson-distributed counts drawn around a decay law on the given time grid.
inline DecaySeries synthetic_decay(DecayModel model, const DecayParams& q, const std::vector<double>& times,
                                   std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  DecaySeries s;
  s.t = times;
  for (double t : times) {
    const double mean = decay_value(model, q, t);
    s.counts.push_back(mean > 0.0 ? static_cast<double>(std::poisson_distribution<long>(mean)(rng)) : 0.0);
  }
  return s;
}

}  // namespace einsel::photon
