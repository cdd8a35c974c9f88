#pragma once

// Seeded random generation: counter-based seed splitting plus Haar-random
// states, unitaries and density matrices.

#include <cstdint>
#include <random>

#include "einsel/core/types.hpp"

namespace einsel {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the `stream`-th independent substream of `master`. Depends only on
/// (master, stream), so parallel and serial consumers see identical streams.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(mix64(master) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream) { return Rng(derive_seed(master, stream)); }

inline CVector random_gaussian_vector(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(n);
  for (auto& c : v) {
    const double re = g(rng);
    const double im = g(rng);
    c = cplx(re, im);
  }
  return v;
}

/// Haar-random normalized vector of dimension n, zero-padded to `dims`.
inline PureState random_pure_state(Dims dims, Rng& rng, std::size_t support = 0) {
  const auto n = static_cast<Eigen::Index>(product(dims));
  const Eigen::Index s = support == 0 ? n : std::min<Eigen::Index>(n, static_cast<Eigen::Index>(support));
  CVector v = CVector::Zero(n);
  v.head(s) = random_gaussian_vector(s, rng);
  return PureState(v / v.norm(), std::move(dims));
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
inline CMatrix random_unitary(Eigen::Index n, Rng& rng) {
  CMatrix g(n, n);
  for (Eigen::Index c = 0; c < n; ++c) g.col(c) = random_gaussian_vector(n, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k) {
    const cplx d = r(k, k);
    if (std::abs(d) > 0.0) q.col(k) *= d / std::abs(d);
  }
  return q;
}

/// Random full-rank density matrix G G† / Tr (Hilbert-Schmidt measure).
inline DensityMatrix random_density_matrix(Dims dims, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(product(dims));
  CMatrix g(n, n);
  for (Eigen::Index c = 0; c < n; ++c) g.col(c) = random_gaussian_vector(n, rng);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(std::move(rho), std::move(dims));
}

}  // namespace einsel
