#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>

#include "einsel/detail/minimize.hpp"
#include "einsel/tomo/scheme.hpp"

namespace einsel::tomo {

/// (|HV> − |VH>)/√2
inline PureState singlet_state() {
  CVector v = CVector::Zero(4);
  v(1) = std::numbers::sqrt2 / 2.0;
  v(2) = -std::numbers::sqrt2 / 2.0;
  return PureState(std::move(v), {2, 2});
}

inline DensityMatrix singlet() { return DensityMatrix::from_pure(singlet_state()); }

/// w·|ψ⁻><ψ⁻| + (1 − w)·I/4
inline DensityMatrix werner(double w) { return singlet().mix(DensityMatrix::maximally_mixed({2, 2}), w); }

namespace detail {

inline void require_two_qubit_physical(const DensityMatrix& rho, const char* what) {
  if (rho.dims() != Dims{2, 2}) throw DimensionError(std::string(what) + " expects a two-qubit state");
  if (!rho.is_physical()) throw NonPhysicalError(std::string(what) + " of a non-physical state");
}

inline CMatrix sigma_yy() {
  return Eigen::kroneckerProduct(CMatrix(pauli::y()), CMatrix(pauli::y())).eval();
}

}  // namespace detail

/// Wootters concurrence. The square roots of the eigenvalues of ρ(σy⊗σy)ρ*(σy⊗σy)
/// are taken as the eigenvalues of the Hermitian √(√ρ ρ̃ √ρ).
inline double concurrence(const DensityMatrix& rho) {
  detail::require_two_qubit_physical(rho, "concurrence");
  const CMatrix yy = detail::sigma_yy();
  const CMatrix tilde = yy * rho.matrix().conjugate() * yy;
  const CMatrix sr = einsel::detail::psd_sqrt(rho.matrix());
  const CMatrix inner = sr * tilde * sr;
  RVector l = einsel::detail::clipped_spectrum(0.5 * (inner + inner.adjoint())).cwiseSqrt();
  std::sort(l.data(), l.data() + l.size(), std::greater<>());
  return std::clamp(l(0) - l(1) - l(2) - l(3), 0.0, 1.0);
}

/// ½ I − |ψ⁻><ψ⁻|
inline CMatrix singlet_witness() {
  return 0.5 * CMatrix::Identity(4, 4) - singlet().matrix();
}

inline double witness_value(const DensityMatrix& rho, const CMatrix& witness = singlet_witness()) {
  detail::require_two_qubit_physical(rho, "witness_value");
  if (witness.rows() != 4 || witness.cols() != 4) throw DimensionError("witness must be 4x4");
  if ((witness - witness.adjoint()).cwiseAbs().maxCoeff() > tol::kHermitian)
    throw ValidationError("entanglement witness must be Hermitian");
  return (witness * rho.matrix()).trace().real();
}

/// Analyzer angles (radians) a, a', b, b'.
struct ChshAngles {
  double a = 0.0, a_prime = 0.0, b = 0.0, b_prime = 0.0;
};

namespace detail {

/// ±1 observable of a linear polarizer at θ: cos2θ σz + sin2θ σx.
inline Mat2 analyzer(double theta) {
  return std::cos(2.0 * theta) * pauli::z() + std::sin(2.0 * theta) * pauli::x();
}

/// Correlation block T_ij = Tr(ρ σ_i ⊗ σ_j) for i, j ∈ {z, x}.
inline Eigen::Matrix2d zx_correlations(const DensityMatrix& rho) {
  Eigen::Matrix2d t;
  const std::array<Mat2, 2> s{pauli::z(), pauli::x()};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      t(i, j) = (Eigen::kroneckerProduct(CMatrix(s[static_cast<std::size_t>(i)]), CMatrix(s[static_cast<std::size_t>(j)])).eval() * rho.matrix())
                    .trace()
                    .real();
  return t;
}

inline double chsh_from_correlations(const Eigen::Matrix2d& t, const ChshAngles& g) {
  const auto n = [](double th) { return Eigen::Vector2d(std::cos(2.0 * th), std::sin(2.0 * th)); };
  const auto e = [&](double x, double y) { return n(x).dot(t * n(y)); };
  return e(g.a, g.b) - e(g.a, g.b_prime) + e(g.a_prime, g.b) + e(g.a_prime, g.b_prime);
}

}  // namespace detail

/// E(θ1, θ2) = Tr(ρ A(θ1) ⊗ A(θ2)), from the Born probabilities of the ±1 outcomes.
inline double correlator(const DensityMatrix& rho, double theta1, double theta2) {
  detail::require_two_qubit_physical(rho, "correlator");
  const CMatrix obs = Eigen::kroneckerProduct(CMatrix(detail::analyzer(theta1)), CMatrix(detail::analyzer(theta2))).eval();
  return (obs * rho.matrix()).trace().real();
}

/// S = E(a,b) − E(a,b') + E(a',b) + E(a',b')
inline double chsh(const DensityMatrix& rho, const ChshAngles& g) {
  return correlator(rho, g.a, g.b) - correlator(rho, g.a, g.b_prime) + correlator(rho, g.a_prime, g.b) +
         correlator(rho, g.a_prime, g.b_prime);
}

struct ChshOptimum {
  double value = 0.0;  // max |S|
  double signed_value = 0.0;
  ChshAngles angles;
};

/// Maximizes |S| over linear analyzer angles: a 4-D grid with `grid` steps per
/// angle on [0, π), then Nelder-Mead from the best grid points.
inline ChshOptimum chsh_optimize(const DensityMatrix& rho, int grid = 12) {
  detail::require_two_qubit_physical(rho, "chsh_optimize");
  const Eigen::Matrix2d t = detail::zx_correlations(rho);
  const double step = std::numbers::pi / grid;

  struct Seed {
    double v;
    ChshAngles g;
  };
  std::vector<Seed> seeds;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j)
      for (int k = 0; k < grid; ++k)
        for (int l = 0; l < grid; ++l) {
          const ChshAngles g{i * step, j * step, k * step, l * step};
          seeds.push_back({std::abs(detail::chsh_from_correlations(t, g)), g});
        }
  std::partial_sort(seeds.begin(), seeds.begin() + 4, seeds.end(), [](const Seed& x, const Seed& y) { return x.v > y.v; });

  ChshOptimum best;
  best.value = -1.0;
  const auto objective = [&](const std::vector<double>& x) {
    return -std::abs(detail::chsh_from_correlations(t, {x[0], x[1], x[2], x[3]}));
  };
  for (std::size_t s = 0; s < 4; ++s) {
    const auto& g = seeds[s].g;
    const auto r = einsel::detail::nelder_mead(objective, {g.a, g.a_prime, g.b, g.b_prime}, std::vector<double>(4, step / 2.0),
                                               {.max_iterations = 5000, .size_tolerance = 1e-12});
    if (-r.value > best.value) {
      best.value = -r.value;
      best.angles = {r.x[0], r.x[1], r.x[2], r.x[3]};
    }
  }
  best.signed_value = chsh(rho, best.angles);
  return best;
}

struct EntanglementReport {
  double concurrence = 0.0;
  double witness = 0.0;
  ChshOptimum chsh;
  double entropy_a = 0.0;  // nats
  double entropy_b = 0.0;
};

inline EntanglementReport entanglement_report(const DensityMatrix& rho) {
  EntanglementReport r;
  r.concurrence = concurrence(rho);
  r.witness = witness_value(rho);
  r.chsh = chsh_optimize(rho);
  r.entropy_a = entropy(partial_trace(rho, Subsystem::A));
  r.entropy_b = entropy(partial_trace(rho, Subsystem::B));
  return r;
}

}  // namespace einsel::tomo
