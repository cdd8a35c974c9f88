#pragma once

// Unitary dynamics of the coupled-mode model and the diagnostics that test
// whether coherent products stay coherent products.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "einsel/modes/oscillators.hpp"
#include "einsel/modes/propagator.hpp"

namespace einsel::modes {

/// Maximum allowed population of either mode's top Fock level.
inline constexpr double kTruncationGuard = 1e-6;

/// Coherent amplitudes (μ_A, μ_B) at a given time.
struct AmplitudePair {
  cplx mu_a{0.0};
  cplx mu_b{0.0};
  double time = 0.0;

  double excitation() const { return std::norm(mu_a) + std::norm(mu_b); }
};

namespace detail {

inline void require_two_mode(const PureState& psi) {
  if (psi.dims().size() != 2) throw DimensionError("expected a two-mode state");
}

inline cplx psi_at(const PureState& psi, std::size_t a, std::size_t b) { return psi[a * psi.dims()[1] + b]; }

}  // namespace detail

/// Larger of the two marginal populations of the top Fock level.
inline double top_level_population(const PureState& psi) {
  detail::require_two_mode(psi);
  const std::size_t na = psi.dims()[0], nb = psi.dims()[1];
  double pa = 0.0, pb = 0.0;
  for (std::size_t b = 0; b < nb; ++b) pa += std::norm(detail::psi_at(psi, na - 1, b));
  for (std::size_t a = 0; a < na; ++a) pb += std::norm(detail::psi_at(psi, a, nb - 1));
  return std::max(pa, pb);
}

/// ⟨a⟩ and ⟨b⟩ on a two-mode state.
inline AmplitudePair first_moments(const PureState& psi, double time = 0.0) {
  detail::require_two_mode(psi);
  const std::size_t na = psi.dims()[0], nb = psi.dims()[1];
  cplx ma = 0.0, mb = 0.0;
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t b = 0; b < nb; ++b) {
      const cplx c = detail::psi_at(psi, a, b);
      if (a > 0) ma += std::conj(detail::psi_at(psi, a - 1, b)) * std::sqrt(static_cast<double>(a)) * c;
      if (b > 0) mb += std::conj(detail::psi_at(psi, a, b - 1)) * std::sqrt(static_cast<double>(b)) * c;
    }
  return {ma, mb, time};
}

/// 1 − |⟨μ_a, μ_b|ψ⟩|² with μ_a = ⟨a⟩, μ_b = ⟨b⟩ evaluated on ψ.
inline double coherence_defect(const PureState& psi) {
  const auto m = first_moments(psi);
  const auto ca = coherent_state_unchecked(m.mu_a, psi.dims()[0]).state;
  const auto cb = coherent_state_unchecked(m.mu_b, psi.dims()[1]).state;
  return std::max(0.0, 1.0 - std::norm(tensor(ca, cb).inner(psi)));
}

/// Norm of the part of H_AB|ψ_A ψ_B⟩ lying in the biorthogonal subspace
/// (I − P_A) ⊗ (I − P_B). Zero means the interaction cannot, at this instant,
/// drive the product toward an entangled state.
inline double biorthogonal_leakage(const PureState& psi_a, const PureState& psi_b, const OscillatorConfig& cfg) {
  if (std::abs(psi_a.norm() - 1.0) > 1e-10 || std::abs(psi_b.norm() - 1.0) > 1e-10)
    throw ValidationError("product factors must be normalized");
  if (psi_a.dim() != cfg.cutoff_a || psi_b.dim() != cfg.cutoff_b)
    throw DimensionError("factor dimensions do not match the mode cutoffs");
  const auto h = build_hamiltonian(cfg);
  const CVector v = h.interaction.matrix() * tensor(psi_a, psi_b).amplitudes();
  const auto na = static_cast<Eigen::Index>(cfg.cutoff_a);
  const auto nb = static_cast<Eigen::Index>(cfg.cutoff_b);
  CMatrix vm(na, nb);
  for (Eigen::Index a = 0; a < na; ++a) vm.row(a) = v.segment(a * nb, nb).transpose();
  const CMatrix qa = CMatrix::Identity(na, na) - psi_a.amplitudes() * psi_a.amplitudes().adjoint();
  const CMatrix qb = CMatrix::Identity(nb, nb) - psi_b.amplitudes() * psi_b.amplitudes().adjoint();
  return (qa * vm * qb.transpose()).norm();
}

/// Exact solution of dμ/dt = −iKμ, K = [[ω_A, iλ], [−iλ, ω_B]], by Hermitian
/// eigen-decomposition of K.
inline AmplitudePair amplitude_flow_exponential(const AmplitudePair& initial, const OscillatorConfig& cfg, double t) {
  Eigen::Matrix2cd k;
  k << cfg.omega_a, cplx(0.0, cfg.lambda), cplx(0.0, -cfg.lambda), cfg.omega_b;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(k);
  Eigen::Vector2cd phases;
  for (int i = 0; i < 2; ++i) phases(i) = std::polar(1.0, -es.eigenvalues()(i) * t);
  const Eigen::Matrix2cd u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  const Eigen::Vector2cd mu = u * Eigen::Vector2cd(initial.mu_a, initial.mu_b);
  return {mu(0), mu(1), initial.time + t};
}

/// c-number flow of the coherent amplitudes:
///   dμ_A/dt = −iω_A μ_A + λ μ_B,  dμ_B/dt = −iω_B μ_B − λ μ_A.
/// Closed form at resonance, matrix exponential otherwise.
inline AmplitudePair amplitude_flow(const AmplitudePair& initial, const OscillatorConfig& cfg, double t) {
  if (!cfg.resonant()) return amplitude_flow_exponential(initial, cfg, t);
  const cplx rot = std::polar(1.0, -cfg.omega_a * t);
  const double c = std::cos(cfg.lambda * t), s = std::sin(cfg.lambda * t);
  return {rot * (initial.mu_a * c + initial.mu_b * s), rot * (-initial.mu_a * s + initial.mu_b * c), initial.time + t};
}

struct Trajectory {
  std::vector<double> times;
  std::vector<PureState> states;
  std::vector<double> entropies;
  std::vector<double> coherence_defects;
  std::vector<double> top_level_populations;
  std::vector<AmplitudePair> moments;

  double max_entropy() const { return entropies.empty() ? 0.0 : *std::max_element(entropies.begin(), entropies.end()); }
  double max_defect() const {
    return coherence_defects.empty() ? 0.0 : *std::max_element(coherence_defects.begin(), coherence_defects.end());
  }
  double mean_entropy() const {
    if (entropies.empty()) return 0.0;
    double s = 0.0;
    for (double e : entropies) s += e;
    return s / static_cast<double>(entropies.size());
  }
};

/// `count` uniform samples over [0, horizon], endpoints included.
inline std::vector<double> uniform_times(double horizon, std::size_t count) {
  if (count < 2) throw ValidationError("need at least two sample times");
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; ++i) t[i] = horizon * static_cast<double>(i) / static_cast<double>(count - 1);
  return t;
}

/// Bundles a configuration with its Hamiltonian and propagator so repeated
/// evolutions reuse one diagonalization.
class CoupledModes {
 public:
  explicit CoupledModes(OscillatorConfig cfg)
      : cfg_(cfg), hamiltonian_(build_hamiltonian(cfg_)), propagator_(hamiltonian_.full) {}

  const OscillatorConfig& config() const noexcept { return cfg_; }
  const TwoModeHamiltonian& hamiltonian() const noexcept { return hamiltonian_; }

  /// Exchange period 2π/λ (infinite when uncoupled).
  double exchange_period() const {
    return cfg_.lambda > 0.0 ? 2.0 * std::numbers::pi / cfg_.lambda : std::numeric_limits<double>::infinity();
  }

  void check_guard(const PureState& psi, double t) const {
    const double top = top_level_population(psi);
    if (top >= kTruncationGuard)
      throw TruncationError("top Fock level population " + std::to_string(top) + " at t=" + std::to_string(t) +
                            " exceeds guard; raise the cutoff");
  }

  /// exp(−iHt)|ψ⟩; the truncation guard is checked on input and output.
  PureState evolve(const PureState& psi, double t) const {
    if (psi.dims() != cfg_.dims()) throw DimensionError("state dimensions do not match the configured cutoffs");
    check_guard(psi, 0.0);
    auto out = propagator_.evolve(psi, t);
    check_guard(out, t);
    return out;
  }

  Trajectory trajectory(const PureState& psi0, std::span<const double> times) const {
    Trajectory tr;
    for (double t : times) {
      auto psi = evolve(psi0, t);
      tr.times.push_back(t);
      tr.entropies.push_back(entanglement_entropy(psi));
      tr.coherence_defects.push_back(coherence_defect(psi));
      tr.top_level_populations.push_back(top_level_population(psi));
      tr.moments.push_back(first_moments(psi, t));
      tr.states.push_back(std::move(psi));
    }
    return tr;
  }

 private:
  OscillatorConfig cfg_;
  TwoModeHamiltonian hamiltonian_;
  Propagator propagator_;
};

inline PureState evolve(const PureState& psi, const OscillatorConfig& cfg, double t) {
  return CoupledModes(cfg).evolve(psi, t);
}

inline PureState coherent_product(cplx mu_a, cplx mu_b, const OscillatorConfig& cfg) {
  return tensor(coherent_state(mu_a, cfg.cutoff_a).state, coherent_state(mu_b, cfg.cutoff_b).state);
}

inline PureState fock_product(std::size_t n_a, std::size_t n_b, const OscillatorConfig& cfg) {
  return tensor(fock_state(n_a, cfg.cutoff_a), fock_state(n_b, cfg.cutoff_b));
}

}  // namespace einsel::modes
