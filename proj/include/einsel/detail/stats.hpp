#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <gsl/gsl_cdf.h>

namespace einsel::detail {

/// Asymptotic Kolmogorov survival function P(K > x).
inline double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.18) return 1.0;  // series converges slowly and the value is 1 to double precision
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Stephens' small-sample correction: λ = (√n + 0.12 + 0.11/√n) D.
inline double ks_lambda(double d, std::size_t n) {
  const double s = std::sqrt(static_cast<double>(n));
  return (s + 0.12 + 0.11 / s) * d;
}

inline double ks_p_value(double d, std::size_t n) { return kolmogorov_survival(ks_lambda(d, n)); }

/// Critical D at significance alpha, by bisection on the survival function.
inline double ks_critical_value(std::size_t n, double alpha) {
  double lo = 0.0, hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_survival(mid) > alpha ? lo : hi) = mid;
  }
  const double s = std::sqrt(static_cast<double>(n));
  return 0.5 * (lo + hi) / (s + 0.12 + 0.11 / s);
}

/// One-sample KS distance of `sorted` against the CDF `cdf`.
template <typename Cdf>
double ks_distance(const std::vector<double>& sorted, Cdf cdf) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Two-sample KS distance between sorted samples a and b.
inline double ks_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson χ² of an observed count histogram (index = count value) against a
/// Poisson law with mean `mu`. Cells are merged left to right until each holds
/// at least `min_expected`; the last cell absorbs the upper tail. One fitted
/// parameter is subtracted from the degrees of freedom.
inline ChiSquare poisson_chi_square(const std::vector<std::size_t>& histogram, double mu, double min_expected = 5.0) {
  std::size_t total = 0;
  for (auto h : histogram) total += h;
  ChiSquare out;
  if (total == 0 || !(mu > 0.0)) return out;
  const double m = static_cast<double>(total);

  std::vector<double> expected, observed;
  double e_acc = 0.0, o_acc = 0.0;
  const std::size_t kmax = histogram.size();
  for (std::size_t k = 0; k < kmax; ++k) {
    e_acc += m * std::exp(static_cast<double>(k) * std::log(mu) - mu - std::lgamma(static_cast<double>(k) + 1.0));
    o_acc += static_cast<double>(histogram[k]);
    if (e_acc >= min_expected) {
      expected.push_back(e_acc);
      observed.push_back(o_acc);
      e_acc = o_acc = 0.0;
    }
  }
  e_acc += m * gsl_cdf_poisson_Q(static_cast<unsigned>(kmax - 1), mu);
  if (!expected.empty() && e_acc < min_expected) {
    expected.back() += e_acc;
    observed.back() += o_acc;
  } else {
    expected.push_back(e_acc);
    observed.push_back(o_acc);
  }
  for (std::size_t i = 0; i < expected.size(); ++i)
    out.statistic += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
  out.dof = static_cast<int>(expected.size()) - 2;
  out.p_value = out.dof >= 1 ? gsl_cdf_chisq_Q(out.statistic, out.dof) : 1.0;
  return out;
}

}  // namespace einsel::detail
