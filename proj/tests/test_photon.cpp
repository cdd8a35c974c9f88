#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "einsel/core.hpp"
#include "einsel/detail/stats.hpp"
#include "einsel/photon.hpp"

using namespace einsel;
using namespace einsel::photon;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr DetectorModel kPerfect{1.0, 0.0, 0.0};
const std::array<DetectorModel, 2> kPerfectPair{kPerfect, kPerfect};

DensityMatrix singlet() {
  CVector v = CVector::Zero(4);
  v(1) = 1.0 / std::sqrt(2.0);
  v(2) = -1.0 / std::sqrt(2.0);
  return DensityMatrix::from_pure(PureState(v, {2, 2}));
}

std::vector<double> sorted_gaps(const ClickStream& s, std::uint32_t det) {
  const auto t = s.times(det);
  std::vector<double> g;
  for (std::size_t i = 1; i < t.size(); ++i) g.push_back(static_cast<double>(t[i] - t[i - 1]) * 1e-9);
  std::sort(g.begin(), g.end());
  return g;
}

// Reference streams sized to ~1e5 events.
ClickStream coherent_stream(std::uint64_t seed = 11) { return simulate_clicks(SourceModel::coherent(3000.0), kPerfectPair, 33.3, seed); }
ClickStream thermal_stream(std::uint64_t seed = 12) {
  return simulate_clicks(SourceModel::thermal(3000.0, 1e-3), kPerfectPair, 33.3, seed);
}
ClickStream single_stream(std::uint64_t seed = 13) {
  return simulate_clicks(SourceModel::single_emitter(1e4, 20e-6), kPerfectPair, 10.0, seed);
}

}  // namespace

TEST_CASE("statistics helpers", "[photon][stats]") {
  SECTION("Kolmogorov survival at tabulated points") {
    CHECK_THAT(einsel::detail::kolmogorov_survival(1.3581), WithinAbs(0.05, 2e-4));
    CHECK_THAT(einsel::detail::kolmogorov_survival(1.6276), WithinAbs(0.01, 2e-4));
    CHECK(einsel::detail::kolmogorov_survival(0.0) == 1.0);
  }
  SECTION("critical value inverts the survival function") {
    const double c = einsel::detail::ks_critical_value(1000, 0.01);
    CHECK_THAT(einsel::detail::ks_p_value(c, 1000), WithinAbs(0.01, 1e-9));
  }
  SECTION("chi-square of an exactly Poisson histogram is near zero") {
    std::vector<std::size_t> h;
    for (int k = 0; k < 15; ++k) h.push_back(static_cast<std::size_t>(std::llround(1e6 * std::exp(-3.0) * std::pow(3.0, k) / std::tgamma(k + 1.0))));
    const auto chi = einsel::detail::poisson_chi_square(h, 3.0);
    CHECK(chi.statistic < 1e-2);
    CHECK(chi.p_value > 0.99);
  }
  SECTION("two-sample KS of identical samples is zero") {
    std::vector<double> a{1, 2, 3, 4};
    CHECK(einsel::detail::ks_two_sample(a, a) == 0.0);
    CHECK_THAT(einsel::detail::ks_two_sample({1, 2}, {3, 4}), WithinAbs(1.0, 1e-15));
  }
}

TEST_CASE("model validation", "[photon]") {
  CHECK_THROWS_AS(SourceModel::coherent(0.0).validate(), ValidationError);
  SourceModel bad = SourceModel::coherent(10.0);
  bad.coherence_time = 1e-3;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_THROWS_AS(SourceModel::single_emitter(1e3, 2e-3).validate(), ValidationError);
  CHECK_THROWS_AS((DetectorModel{1.5, 0.0, 0.0}.validate()), ValidationError);
  CHECK_THROWS_AS((DetectorModel{0.5, -1.0, 0.0}.validate()), ValidationError);
  CHECK_THROWS_AS(simulate_clicks(SourceModel::coherent(10.0), kPerfectPair, 0.0, 1), ValidationError);
  CHECK_NOTHROW(SourceModel::pair_source(100.0, singlet()).validate());
  CHECK(source_kind_from_string("single_emitter") == SourceKind::kSingleEmitter);
}

TEST_CASE("simulate_clicks", "[photon][simulate]") {
  SECTION("coherent totals and Fano factor are Poissonian") {
    const auto s = simulate_clicks(SourceModel::coherent(1000.0), kPerfectPair, 100.0, 7);
    CHECK(std::abs(static_cast<double>(s.events.size()) - 1e5) < 4.0 * std::sqrt(1e5));
    const auto cs = counting_stats(s, 0.1);
    CHECK(std::abs(cs.fano - 1.0) < 4.0 * cs.mandel_q_stderr);
  }
  SECTION("efficiency zero leaves only dark counts") {
    const std::array<DetectorModel, 2> blind{DetectorModel{0.0, 50.0, 0.0}, DetectorModel{0.0, 0.0, 0.0}};
    const auto s = simulate_clicks(SourceModel::coherent(1e4), blind, 10.0, 3);
    CHECK(s.count(1) == 0);
    CHECK(std::abs(static_cast<double>(s.count(0)) - 500.0) < 4.0 * std::sqrt(500.0));
    const auto dark_free = simulate_clicks(SourceModel::coherent(1e4), {DetectorModel{0.0, 0.0, 0.0}, DetectorModel{0.0, 0.0, 0.0}}, 1.0, 3);
    CHECK(dark_free.events.empty());
  }
  SECTION("single emitter never clicks twice within a tenth of its lifetime") {
    const double lifetime = 1e-6;
    const auto s = simulate_clicks(SourceModel::single_emitter(1000.0, lifetime), kPerfectPair, 100.0, 5);
    REQUIRE(s.events.size() > 90000);
    CHECK(coincidences(s, lifetime / 10.0).raw == 0);
  }
  SECTION("streams are bit-identical for equal seeds") {
    for (const auto& src : {SourceModel::coherent(500.0), SourceModel::thermal(500.0, 1e-3),
                            SourceModel::single_emitter(500.0, 1e-4), SourceModel::pair_source(500.0, singlet())}) {
      const std::array<DetectorModel, 2> det{DetectorModel{0.8, 20.0, 1e-6}, DetectorModel{0.6, 5.0, 2e-6}};
      const auto a = simulate_clicks(src, det, 5.0, 99);
      const auto b = simulate_clicks(src, det, 5.0, 99);
      const auto c = simulate_clicks(src, det, 5.0, 100);
      CHECK(a.events == b.events);
      CHECK(a.events != c.events);
      CHECK_NOTHROW(a.validate());
    }
  }
  SECTION("dead time is never violated") {
    const double dead = 5e-6;
    const std::array<DetectorModel, 2> det{DetectorModel{1.0, 1000.0, dead}, DetectorModel{1.0, 0.0, dead}};
    const auto s = simulate_clicks(SourceModel::thermal(2e4, 1e-4), det, 5.0, 21);
    const auto dead_ns = static_cast<std::uint64_t>(std::llround(dead * 1e9));
    for (std::uint32_t d : {0u, 1u}) {
      const auto t = s.times(d);
      REQUIRE(t.size() > 1000);
      for (std::size_t i = 1; i < t.size(); ++i) REQUIRE(t[i] - t[i - 1] >= dead_ns);
    }
  }
  SECTION("thinning by efficiency is indistinguishable from a lower rate") {
    const double eta = 0.4;
    const std::array<DetectorModel, 2> lossy{DetectorModel{eta, 0.0, 0.0}, DetectorModel{eta, 0.0, 0.0}};
    const auto thinned = simulate_clicks(SourceModel::coherent(5000.0), lossy, 20.0, 31);
    const auto direct = simulate_clicks(SourceModel::coherent(eta * 5000.0), kPerfectPair, 20.0, 32);
    const auto ga = sorted_gaps(thinned, 0), gb = sorted_gaps(direct, 0);
    const double na = static_cast<double>(ga.size()), nb = static_cast<double>(gb.size());
    // two-sample critical value at the two-sided 4σ level (alpha ≈ 6.3e-5)
    const double crit = std::sqrt(-0.5 * std::log(6.3e-5 / 2.0)) * std::sqrt((na + nb) / (na * nb));
    CHECK(einsel::detail::ks_two_sample(ga, gb) < crit);
  }
  SECTION("pair source sends one photon to each arm at the same instant") {
    const auto s = simulate_clicks(SourceModel::pair_source(1000.0, singlet()), kPerfectPair, 10.0, 8);
    CHECK(s.count(0) == s.count(1));
    CHECK(s.times(0) == s.times(1));
  }
}

TEST_CASE("waiting times", "[photon][estimators]") {
  SECTION("coherent gaps are exponential at the 1% level") {
    const auto r = waiting_times(simulate_clicks(SourceModel::coherent(1e4), kPerfectPair, 20.0, 41), 0);
    CHECK(r.gaps > 90000);
    CHECK(r.ks_distance < r.ks_critical);
    CHECK(r.exponential);
    CHECK_THAT(r.rate, WithinRel(5000.0, 0.02));
  }
  SECTION("evenly spaced clicks are flagged") {
    ClickStream s;
    s.duration = 1.0;
    for (std::uint64_t i = 1; i <= 1000; ++i) s.events.push_back({i * 1000000ull - 500000ull, 0});
    const auto r = waiting_times(s, 0);
    CHECK_THAT(r.ks_distance, WithinAbs(1.0 - std::exp(-1.0), 1e-6));
    CHECK_FALSE(r.exponential);
  }
  SECTION("thermal gaps are bunched") {
    const auto r = waiting_times(thermal_stream(), 0);
    CHECK_FALSE(r.exponential);
    CHECK(r.ks_distance > 3.0 * r.ks_critical);
  }
  SECTION("too few events") {
    ClickStream s;
    s.duration = 1.0;
    for (std::uint64_t i = 0; i < 50; ++i) s.events.push_back({i * 1000, 0});
    CHECK_THROWS_AS(waiting_times(s, 0), ValidationError);
  }
}

TEST_CASE("counting statistics", "[photon][estimators]") {
  SECTION("coherent light is Poissonian") {
    const auto cs = counting_stats(coherent_stream(), 1e-3);
    CHECK(std::abs(cs.mandel_q) < 4.0 * cs.mandel_q_stderr);
    CHECK(cs.poisson_chi2.p_value > 1e-4);
  }
  SECTION("thermal light with a window below the coherence time is super-Poissonian") {
    const auto cs = counting_stats(thermal_stream(), 1e-4);
    CHECK(cs.mandel_q > 4.0 * cs.mandel_q_stderr);
  }
  SECTION("a single emitter with a window below its lifetime is sub-Poissonian") {
    const auto cs = counting_stats(single_stream(), 2e-6);
    CHECK(cs.mandel_q < -4.0 * cs.mandel_q_stderr);
  }
  SECTION("window must leave at least 50 bins") {
    CHECK_THROWS_AS(counting_stats(coherent_stream(), 1.0), ValidationError);
  }
  SECTION("histogram matches hand counts") {
    ClickStream s;
    s.duration = 0.1;
    for (std::uint64_t i = 0; i < 50; ++i) s.events.push_back({i * 2000000ull, 0});  // one event per 2 ms
    const auto cs = counting_stats(s, 1e-3);
    CHECK(cs.windows == 100);
    CHECK(cs.histogram == std::vector<std::size_t>{50, 50});
    CHECK_THAT(cs.mean, WithinAbs(0.5, 1e-15));
    CHECK_THAT(cs.variance, WithinAbs(0.25 * 100.0 / 99.0, 1e-15));
  }
}

TEST_CASE("g2", "[photon][estimators]") {
  const auto coherent = g2(coherent_stream(), {2e-4, 4e-3});
  const auto thermal = g2(thermal_stream(), {2e-5, 2e-2});
  const auto single = g2(single_stream(), {2e-6, 4e-4});

  SECTION("zero-lag values of the three source classes") {
    CHECK_THAT(coherent.at_zero(), WithinAbs(1.0, 0.05));
    CHECK_THAT(thermal.at_zero(), WithinAbs(2.0, 0.1));
    CHECK(single.at_zero() < 0.1);
  }
  SECTION("ordering is resolved by at least five standard errors") {
    CHECK(single.at_zero() + 5.0 * single.stderr_at_zero() < coherent.at_zero() - 5.0 * coherent.stderr_at_zero());
    CHECK(coherent.at_zero() + 5.0 * coherent.stderr_at_zero() < thermal.at_zero() - 5.0 * thermal.stderr_at_zero());
  }
  SECTION("far lags normalize to one") {
    // Per-bin 3σ acceptance, so allow the ~0.3% of bins expected outside it.
    for (const auto* c : {&coherent, &thermal, &single}) {
      const double far = c->lags.back() / 2.0;
      std::size_t total = 0, inside = 0;
      for (std::size_t i = 0; i < c->lags.size(); ++i) {
        if (std::abs(c->lags[i]) < far) continue;
        ++total;
        inside += std::abs(c->g2[i] - 1.0) <= 3.0 * c->standard_error[i];
      }
      REQUIRE(total >= 10);
      CHECK(static_cast<double>(inside) >= 0.98 * static_cast<double>(total));
    }
  }
  SECTION("lag grid is symmetric and g2 nonnegative") {
    for (std::size_t i = 0; i < thermal.lags.size(); ++i) {
      CHECK_THAT(thermal.lags[i], WithinAbs(-thermal.lags[thermal.lags.size() - 1 - i], 1e-15));
      CHECK(thermal.g2[i] >= 0.0);
    }
    CHECK(thermal.lags[thermal.zero_index()] == 0.0);
  }
  SECTION("hand-built stream") {
    // detector 1 always fires 3 µs after detector 0
    ClickStream s;
    s.duration = 1.0;
    for (std::uint64_t i = 0; i < 6000; ++i) {
      s.events.push_back({i * 100000ull, 0});
      s.events.push_back({i * 100000ull + 3000ull, 1});
    }
    const auto c = g2(s, {1e-6, 5e-6});
    for (std::size_t i = 0; i < c.lags.size(); ++i) CHECK(c.coincidences[i] == (std::abs(c.lags[i] - 3e-6) < 1e-9 ? 6000u : 0u));
  }
  SECTION("single-detector stream is rejected") {
    const std::array<DetectorModel, 2> one{kPerfect, DetectorModel{0.0, 0.0, 0.0}};
    CHECK_THROWS_AS(g2(simulate_clicks(SourceModel::coherent(1e4), one, 2.0, 1)), ValidationError);
  }
}

TEST_CASE("coincidences", "[photon][estimators]") {
  SECTION("pair source with perfect detectors") {
    const auto s = simulate_clicks(SourceModel::pair_source(1000.0, singlet()), kPerfectPair, 10.0, 9);
    const auto r = coincidences(s, 1e-8);
    CHECK(std::abs(r.corrected - static_cast<double>(s.count(0))) <= 5.0);
    CHECK_FALSE(r.correction_dominates);
  }
  SECTION("independent coherent streams have no true coincidences") {
    const auto a = simulate_clicks(SourceModel::coherent(5000.0), kPerfectPair, 10.0, 1);
    const auto b = simulate_clicks(SourceModel::coherent(5000.0), kPerfectPair, 10.0, 2);
    ClickStream s;
    s.duration = 10.0;
    for (auto t : a.times(0)) s.events.push_back({t, 0});
    for (auto t : b.times(1)) s.events.push_back({t, 1});
    std::sort(s.events.begin(), s.events.end());
    const auto r = coincidences(s, 1e-5);
    CHECK(std::abs(static_cast<double>(r.raw) - r.accidental) < 4.0 * std::sqrt(r.accidental));
    CHECK(r.correction_dominates);
  }
  SECTION("empty stream") {
    const auto r = coincidences(ClickStream{}, 1e-6);
    CHECK(r.raw == 0);
    CHECK(r.accidental == 0.0);
    CHECK(r.corrected == 0.0);
  }
  SECTION("floored when accidentals exceed the raw count") {
    ClickStream s;
    s.duration = 1.0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      s.events.push_back({i * 1000000ull, 0});
      s.events.push_back({i * 1000000ull + 500000ull, 1});
    }
    const auto r = coincidences(s, 1e-4);
    CHECK(r.raw == 0);
    CHECK(r.floored);
    CHECK(r.corrected == 0.0);
  }
}

TEST_CASE("click file format", "[photon][io]") {
  SECTION("round trip") {
    const auto s = simulate_clicks(SourceModel::coherent(2000.0), {DetectorModel{0.9, 10.0, 1e-7}, kPerfect}, 1.5, 4);
    std::istringstream in(to_clickstream_text(s));
    const auto back = read_clickstream(in);
    CHECK(back.events == s.events);
    CHECK(back.duration == s.duration);
  }
  SECTION("header only is an empty stream") {
    std::istringstream in("# clickstream v1 duration_s=2.5\n");
    const auto s = read_clickstream(in);
    CHECK(s.events.empty());
    CHECK(s.duration == 2.5);
  }
  SECTION("optional label column is accepted") {
    std::istringstream in("# clickstream v1 duration_s=1\n10\t0\tH\n20\t1\tV\n");
    CHECK(read_clickstream(in).events.size() == 2);
  }
  SECTION("errors carry line numbers") {
    const auto line_of = [](const std::string& text) {
      std::istringstream in(text);
      try {
        read_clickstream(in);
      } catch (const FormatError& e) {
        return e.line();
      }
      return std::size_t{0};
    };
    CHECK(line_of("") == 1);
    CHECK(line_of("# clickstream v2 duration_s=1\n") == 1);
    CHECK(line_of("# clickstream v1 duration_s=abc\n") == 1);
    CHECK(line_of("# clickstream v1 duration_s=1\n10\t0\n10\t0\n") == 3);
    CHECK(line_of("# clickstream v1 duration_s=1\n10\t0\n5\t1\n") == 3);
    CHECK(line_of("# clickstream v1 duration_s=1\n10 0\n") == 2);
    CHECK(line_of("# clickstream v1 duration_s=1\n-3\t0\n") == 2);
    CHECK(line_of("# clickstream v1 duration_s=1\n1\t0\n2000000000\t0\n") == 3);
  }
}

TEST_CASE("decay fits", "[photon][decay]") {
  std::vector<double> times;
  for (int i = 0; i < 100; ++i) times.push_back(static_cast<double>(i));

  SECTION("exponential data") {
    const auto s = synthetic_decay(DecayModel::kExponential, {1000.0, 20.0}, times, 1);
    const auto r = fit_decay(s);
    CHECK(r.best().model == DecayModel::kExponential);
    CHECK_THAT(r.fit(DecayModel::kExponential).params.tau, WithinRel(20.0, 0.05));
    CHECK_FALSE(r.indeterminate);
  }
  SECTION("hyperbolic data") {
    const auto s = synthetic_decay(DecayModel::kHyperbolic, {1000.0, 10.0, 2.0}, times, 2);
    const auto r = fit_decay(s);
    CHECK(r.best().model == DecayModel::kHyperbolic);
    CHECK_THAT(r.fit(DecayModel::kHyperbolic).params.p, WithinRel(2.0, 0.10));
  }
  SECTION("modulated data prefers the modulated law") {
    DecayParams q{1000.0, 30.0, 1.0, 0.3, 2.0 * std::numbers::pi / 12.5, 0.4};
    const auto s = synthetic_decay(DecayModel::kExponentialModulated, q, times, 3);
    const auto r = fit_decay(s, {.include_modulated = true});
    CHECK(r.best().model == DecayModel::kExponentialModulated);
    CHECK_THAT(r.best().params.omega, WithinRel(q.omega, 0.02));
  }
  SECTION("constant series is indeterminate") {
    DecaySeries s{times, std::vector<double>(times.size(), 50.0)};
    const auto r = fit_decay(s);
    CHECK(r.indeterminate);
    CHECK(r.fits.size() == 2);
    CHECK(fit_decay(s, {.include_modulated = true}).fits.size() == 4);
  }
  SECTION("preconditions") {
    CHECK_THROWS_AS(fit_decay({{0, 1, 2}, {1, 1, 1}}), ValidationError);
    DecaySeries neg{times, std::vector<double>(times.size(), 1.0)};
    neg.counts[3] = -1.0;
    CHECK_THROWS_AS(fit_decay(neg), ValidationError);
  }
  SECTION("all-zero series is reported, not fatal") {
    DecaySeries z{times, std::vector<double>(times.size(), 0.0)};
    DecayFitReport r;
    REQUIRE_NOTHROW(r = fit_decay(z));
    CHECK(r.indeterminate);
  }
}
