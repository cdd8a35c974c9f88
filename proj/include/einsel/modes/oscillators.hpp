#pragma once

#include <cstddef>
#include <string>

#include "einsel/core/fock.hpp"
#include "einsel/core/ops.hpp"

namespace einsel::modes {

/// Two exchange-coupled oscillators, ħ = 1. Frequencies and coupling in 1/time.
struct OscillatorConfig {
  double omega_a = 1.0;
  double omega_b = 1.0;
  double lambda = 0.1;
  std::size_t cutoff_a = 24;
  std::size_t cutoff_b = 24;

  bool resonant() const noexcept { return omega_a == omega_b; }
  Dims dims() const { return {cutoff_a, cutoff_b}; }
  std::size_t dim() const noexcept { return cutoff_a * cutoff_b; }

  void validate() const {
    if (!(lambda >= 0.0)) throw ValidationError("coupling lambda must be >= 0");
    if (cutoff_a < 2 || cutoff_b < 2) throw ValidationError("mode cutoffs must be >= 2");
    if (!std::isfinite(omega_a) || !std::isfinite(omega_b)) throw ValidationError("frequencies must be finite");
  }
};

/// a ⊗ I, I ⊗ b and their number operators on the two-mode space.
struct ModeOperators {
  Operator a, b, na, nb;

  explicit ModeOperators(const OscillatorConfig& cfg)
      : a(tensor(annihilation(cfg.cutoff_a), Operator::identity({cfg.cutoff_b}))),
        b(tensor(Operator::identity({cfg.cutoff_a}), annihilation(cfg.cutoff_b))),
        na(tensor(number_operator(cfg.cutoff_a), Operator::identity({cfg.cutoff_b}))),
        nb(tensor(Operator::identity({cfg.cutoff_a}), number_operator(cfg.cutoff_b))) {}
};

struct TwoModeHamiltonian {
  Operator full;         ///< H_A + H_B + H_AB
  Operator interaction;  ///< H_AB = iλ(a†b − ab†)
};

/// H = ω_A a†a ⊗ I + ω_B I ⊗ b†b + iλ(a† ⊗ b − a ⊗ b†), filled element by element.
inline TwoModeHamiltonian build_hamiltonian(const OscillatorConfig& cfg) {
  cfg.validate();
  const auto na = static_cast<Eigen::Index>(cfg.cutoff_a);
  const auto nb = static_cast<Eigen::Index>(cfg.cutoff_b);
  const auto idx = [nb](Eigen::Index a, Eigen::Index b) { return a * nb + b; };
  const cplx i_lambda(0.0, cfg.lambda);
  CMatrix h_ab = CMatrix::Zero(na * nb, na * nb);
  CMatrix h_free = CMatrix::Zero(na * nb, na * nb);
  for (Eigen::Index a = 0; a < na; ++a)
    for (Eigen::Index b = 0; b < nb; ++b) {
      h_free(idx(a, b), idx(a, b)) = cfg.omega_a * static_cast<double>(a) + cfg.omega_b * static_cast<double>(b);
      // a†b: |a,b> -> sqrt(a+1) sqrt(b) |a+1,b-1>
      if (a + 1 < na && b > 0)
        h_ab(idx(a + 1, b - 1), idx(a, b)) += i_lambda * std::sqrt(static_cast<double>((a + 1) * b));
      // -ab†: |a,b> -> -sqrt(a) sqrt(b+1) |a-1,b+1>
      if (a > 0 && b + 1 < nb)
        h_ab(idx(a - 1, b + 1), idx(a, b)) -= i_lambda * std::sqrt(static_cast<double>(a * (b + 1)));
    }
  CMatrix h = h_free + h_ab;
  return {Operator(std::move(h), cfg.dims()), Operator(std::move(h_ab), cfg.dims())};
}

}  // namespace einsel::modes
