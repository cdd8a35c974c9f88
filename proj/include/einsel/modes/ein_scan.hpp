#pragma once

// Environment-induced selection scan: rank candidate initial product states by
// how much entanglement they build up with the partner mode over time.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "einsel/core/random.hpp"
#include "einsel/modes/dynamics.hpp"

namespace einsel::modes {

enum class CandidateFamily { kCoherent, kFock, kRandomProduct };

inline const char* to_string(CandidateFamily f) {
  switch (f) {
    case CandidateFamily::kCoherent: return "coherent";
    case CandidateFamily::kFock: return "fock";
    case CandidateFamily::kRandomProduct: return "random_product";
  }
  return "?";
}

/// Amplitudes {0} ∪ {r·e^{2πik/phases}}; every ordered pair becomes a candidate.
struct CoherentGrid {
  std::vector<double> moduli{0.5, 1.0, 1.5};
  std::size_t phases = 4;
};

/// |n, m⟩ with n + m ≤ max_total.
struct FockPairs {
  std::size_t max_total = 3;
};

/// Haar-random local states supported on the lower half of each cutoff.
struct RandomProducts {
  std::size_t count = 8;
  std::uint64_t seed = 1;
};

struct CandidateFamilies {
  std::optional<CoherentGrid> coherent;
  std::optional<FockPairs> fock;
  std::optional<RandomProducts> random;
};

struct Candidate {
  std::string label;
  CandidateFamily family;
  PureState state;
  bool coherent_product;  // true also for the Fock vacuum |0,0⟩
};

struct CandidateScore {
  std::size_t index;
  std::string label;
  CandidateFamily family;
  bool coherent_product;
  double mean_entropy;
  double max_entropy;
};

struct EinReport {
  double horizon;
  std::size_t samples;
  std::vector<CandidateScore> ranking;  // ascending mean entropy

  /// Every coherent product has lower mean entropy than every candidate that
  /// is not a coherent product.
  bool coherent_products_minimal() const {
    double worst_coherent = -1.0, best_other = std::numeric_limits<double>::infinity();
    bool any_coherent = false;
    for (const auto& s : ranking) {
      if (s.coherent_product) {
        worst_coherent = std::max(worst_coherent, s.mean_entropy);
        any_coherent = true;
      } else {
        best_other = std::min(best_other, s.mean_entropy);
      }
    }
    return any_coherent && worst_coherent < best_other;
  }
};

namespace detail {

inline std::string complex_label(cplx z) {
  std::ostringstream os;
  os.precision(4);
  os << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
  return os.str();
}

}  // namespace detail

inline std::vector<Candidate> make_candidates(const CandidateFamilies& families, const OscillatorConfig& cfg) {
  std::vector<Candidate> out;
  if (families.coherent) {
    std::vector<cplx> amps{0.0};
    for (double r : families.coherent->moduli)
      for (std::size_t k = 0; k < families.coherent->phases; ++k)
        amps.push_back(std::polar(r, 2.0 * std::numbers::pi * static_cast<double>(k) /
                                         static_cast<double>(families.coherent->phases)));
    for (cplx ma : amps)
      for (cplx mb : amps)
        out.push_back({"coherent(" + detail::complex_label(ma) + "," + detail::complex_label(mb) + ")",
                       CandidateFamily::kCoherent, coherent_product(ma, mb, cfg), true});
  }
  if (families.fock) {
    for (std::size_t total = 0; total <= families.fock->max_total; ++total)
      for (std::size_t n = 0; n <= total; ++n)
        out.push_back({"fock(" + std::to_string(n) + "," + std::to_string(total - n) + ")", CandidateFamily::kFock,
                       fock_product(n, total - n, cfg), total == 0});
  }
  if (families.random) {
    Rng rng = make_rng(families.random->seed, 0);
    for (std::size_t i = 0; i < families.random->count; ++i) {
      auto pa = random_pure_state({cfg.cutoff_a}, rng, cfg.cutoff_a / 2);
      auto pb = random_pure_state({cfg.cutoff_b}, rng, cfg.cutoff_b / 2);
      out.push_back({"random(" + std::to_string(i) + ")", CandidateFamily::kRandomProduct, tensor(pa, pb), false});
    }
  }
  return out;
}

/// Time-averaged reduced entropy of each candidate over `samples` uniform
/// times in [0, horizon] (horizon defaults to one exchange period).
/// Candidates are evaluated in parallel and merged by index.
inline EinReport ein_scan(const OscillatorConfig& cfg, const CandidateFamilies& families,
                          std::optional<double> horizon = std::nullopt, std::size_t samples = 64,
                          unsigned threads = 0) {
  const CoupledModes model(cfg);
  const double t_end = horizon.value_or(model.exchange_period());
  if (!std::isfinite(t_end) || t_end <= 0.0) throw ValidationError("scan horizon must be positive and finite");
  const auto times = uniform_times(t_end, samples);
  const auto candidates = make_candidates(families, cfg);
  if (candidates.empty()) throw ValidationError("no candidate families selected");
  for (const auto& c : candidates) model.check_guard(c.state, 0.0);

  std::vector<CandidateScore> scores(candidates.size());
  std::vector<std::exception_ptr> errors(candidates.size());
  auto work = [&](std::size_t i) {
    try {
      const auto& c = candidates[i];
      double sum = 0.0, peak = 0.0;
      for (double t : times) {
        const double s = entanglement_entropy(model.evolve(c.state, t));
        sum += s;
        peak = std::max(peak, s);
      }
      scores[i] = {i, c.label, c.family, c.coherent_product, sum / static_cast<double>(times.size()), peak};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(threads ? threads : std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(candidates.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < n_threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < candidates.size(); i += n_threads) work(i);
    });
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::stable_sort(scores.begin(), scores.end(),
                   [](const CandidateScore& x, const CandidateScore& y) { return x.mean_entropy < y.mean_entropy; });
  return {t_end, samples, std::move(scores)};
}

}  // namespace einsel::modes
