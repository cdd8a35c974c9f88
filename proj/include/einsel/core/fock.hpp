#pragma once

// Single-mode truncated Fock space: ladder operators, Fock and coherent states.

#include <cmath>
#include <cstddef>
#include <string>

#include "einsel/core/types.hpp"

namespace einsel {

inline constexpr double kDefaultTailTolerance = 1e-8;

/// Annihilation operator a on a mode truncated to `cutoff` levels: ⟨n−1|a|n⟩ = sqrt(n).
inline Operator annihilation(std::size_t cutoff) {
  if (cutoff < 2) throw ValidationError("annihilation operator needs cutoff >= 2");
  const auto n = static_cast<Eigen::Index>(cutoff);
  CMatrix m = CMatrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) m(k - 1, k) = std::sqrt(static_cast<double>(k));
  return Operator(std::move(m), {cutoff});
}

inline Operator creation(std::size_t cutoff) { return annihilation(cutoff).adjoint(); }

/// a†a, diagonal 0..cutoff−1.
inline Operator number_operator(std::size_t cutoff) {
  if (cutoff < 1) throw ValidationError("number operator needs cutoff >= 1");
  const auto n = static_cast<Eigen::Index>(cutoff);
  CMatrix m = CMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) m(k, k) = static_cast<double>(k);
  return Operator(std::move(m), {cutoff});
}

inline PureState fock_state(std::size_t n, std::size_t cutoff) {
  if (n >= cutoff) throw TruncationError("Fock level " + std::to_string(n) + " not below cutoff " + std::to_string(cutoff));
  return PureState::basis(n, {cutoff});
}

struct CoherentState {
  PureState state;
  /// 1 − Σ_{n<cutoff} |c_n|² before renormalization.
  double truncation_loss;
};

/// Truncated expansion of |mu⟩, renormalized, without any tail check.
inline CoherentState coherent_state_unchecked(cplx mu, std::size_t cutoff) {
  if (cutoff < 1) throw ValidationError("coherent state needs cutoff >= 1");
  const auto n = static_cast<Eigen::Index>(cutoff);
  CVector c(n);
  c(0) = std::exp(-0.5 * std::norm(mu));
  for (Eigen::Index k = 1; k < n; ++k) c(k) = c(k - 1) * mu / std::sqrt(static_cast<double>(k));
  const double kept = c.squaredNorm();
  return {PureState(c / std::sqrt(kept), {cutoff}), std::max(0.0, 1.0 - kept)};
}

/// Coherent state c_n = e^{−|mu|²/2} mu^n / sqrt(n!), n < cutoff, renormalized.
/// Throws TruncationError when the discarded Poisson tail exceeds `tail_tolerance`.
inline CoherentState coherent_state(cplx mu, std::size_t cutoff, double tail_tolerance = kDefaultTailTolerance) {
  auto out = coherent_state_unchecked(mu, cutoff);
  if (out.truncation_loss > tail_tolerance)
    throw TruncationError("coherent state |mu|=" + std::to_string(std::abs(mu)) + " loses " +
                          std::to_string(out.truncation_loss) + " of its norm at cutoff " + std::to_string(cutoff));
  return out;
}

}  // namespace einsel
