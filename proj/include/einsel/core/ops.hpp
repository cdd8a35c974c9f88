#pragma once

// Composite-system operations on dense states: Kronecker products, partial
// trace, Schmidt decomposition, von Neumann entropy and Uhlmann fidelity.

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "einsel/core/types.hpp"

namespace einsel {

enum class Subsystem : std::size_t { A = 0, B = 1 };

namespace detail {

inline Dims concat(const Dims& x, const Dims& y) {
  Dims out = x;
  out.insert(out.end(), y.begin(), y.end());
  return out;
}

inline void require_bipartite(const Dims& dims) {
  if (dims.size() != 2) throw DimensionError("operation requires exactly two declared subsystems");
}

// Hermitian spectrum with tiny negative eigenvalues zeroed.
inline RVector clipped_spectrum(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  RVector ev = es.eigenvalues();
  for (auto& v : ev)
    if (v < tol::kSpectrumClip) v = 0.0;
  return ev;
}

// Principal square root of a positive semidefinite Hermitian matrix.
inline CMatrix psd_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  RVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

// Amplitudes reshaped so that row = index of A, column = index of B.
inline CMatrix amplitude_matrix(const PureState& psi) {
  require_bipartite(psi.dims());
  const auto na = static_cast<Eigen::Index>(psi.dims()[0]);
  const auto nb = static_cast<Eigen::Index>(psi.dims()[1]);
  CMatrix m(na, nb);
  for (Eigen::Index a = 0; a < na; ++a)
    for (Eigen::Index b = 0; b < nb; ++b) m(a, b) = psi.amplitudes()(a * nb + b);
  return m;
}

}  // namespace detail

inline Operator tensor(const Operator& x, const Operator& y) {
  return Operator(Eigen::kroneckerProduct(x.matrix(), y.matrix()).eval(), detail::concat(x.dims(), y.dims()));
}

inline PureState tensor(const PureState& x, const PureState& y) {
  return PureState(Eigen::kroneckerProduct(x.amplitudes(), y.amplitudes()).eval(),
                   detail::concat(x.dims(), y.dims()));
}

inline DensityMatrix tensor(const DensityMatrix& x, const DensityMatrix& y) {
  CMatrix m = Eigen::kroneckerProduct(x.matrix(), y.matrix()).eval();
  auto dims = detail::concat(x.dims(), y.dims());
  if (x.is_physical() && y.is_physical()) return DensityMatrix(std::move(m), std::move(dims));
  return DensityMatrix::flagged(std::move(m), std::move(dims));
}

/// Reduced state of the kept subsystem of a bipartite density matrix.
inline DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem keep) {
  detail::require_bipartite(rho.dims());
  const auto na = static_cast<Eigen::Index>(rho.dims()[0]);
  const auto nb = static_cast<Eigen::Index>(rho.dims()[1]);
  const auto& m = rho.matrix();
  CMatrix out;
  if (keep == Subsystem::A) {
    out = CMatrix::Zero(na, na);
    for (Eigen::Index i = 0; i < na; ++i)
      for (Eigen::Index j = 0; j < na; ++j)
        for (Eigen::Index b = 0; b < nb; ++b) out(i, j) += m(i * nb + b, j * nb + b);
  } else {
    out = CMatrix::Zero(nb, nb);
    for (Eigen::Index i = 0; i < nb; ++i)
      for (Eigen::Index j = 0; j < nb; ++j)
        for (Eigen::Index a = 0; a < na; ++a) out(i, j) += m(a * nb + i, a * nb + j);
  }
  const Dims dims{rho.dims()[static_cast<std::size_t>(keep)]};
  if (rho.is_physical()) return DensityMatrix(std::move(out), dims);
  return DensityMatrix::flagged(std::move(out), dims);
}

/// Reduced state of a bipartite pure state, without forming |ψ⟩⟨ψ|.
inline DensityMatrix partial_trace(const PureState& psi, Subsystem keep) {
  if (std::abs(psi.norm() - 1.0) > tol::kTrace) throw NonPhysicalError("pure state is not normalized");
  const CMatrix m = detail::amplitude_matrix(psi);
  CMatrix out = keep == Subsystem::A ? CMatrix(m * m.adjoint()) : CMatrix((m.adjoint() * m).transpose());
  return DensityMatrix(std::move(out), {psi.dims()[static_cast<std::size_t>(keep)]});
}

/// Schmidt decomposition of a bipartite pure state.
///
/// Weights are sorted descending. Each left vector is phase-canonicalized so its
/// first nonzero component is real positive (the right vector absorbs the phase);
/// weights equal within 1e-12 are ordered lexicographically on the canonical left
/// vectors (real part, then imaginary part, descending).
inline SchmidtDecomposition schmidt(const PureState& psi) {
  const CMatrix m = detail::amplitude_matrix(psi);
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Index r = std::min(m.rows(), m.cols());

  struct Term {
    double weight;
    CVector left, right;
  };
  std::vector<Term> terms;
  terms.reserve(static_cast<std::size_t>(r));
  for (Eigen::Index i = 0; i < r; ++i) {
    const double s = svd.singularValues()(i);
    CVector left = svd.matrixU().col(i);
    CVector right = svd.matrixV().col(i).conjugate();
    for (Eigen::Index k = 0; k < left.size(); ++k) {
      if (std::abs(left(k)) > 1e-12) {
        const cplx phase = left(k) / std::abs(left(k));
        left /= phase;
        right *= phase;
        break;
      }
    }
    terms.push_back({s * s, std::move(left), std::move(right)});
  }

  std::stable_sort(terms.begin(), terms.end(), [](const Term& x, const Term& y) { return x.weight > y.weight; });
  auto lex_greater = [](const CVector& x, const CVector& y) {
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (std::abs(x(k).real() - y(k).real()) > 1e-12) return x(k).real() > y(k).real();
      if (std::abs(x(k).imag() - y(k).imag()) > 1e-12) return x(k).imag() > y(k).imag();
    }
    return false;
  };
  for (std::size_t begin = 0; begin < terms.size();) {
    std::size_t end = begin + 1;
    while (end < terms.size() && std::abs(terms[begin].weight - terms[end].weight) <= 1e-12) ++end;
    std::stable_sort(terms.begin() + static_cast<std::ptrdiff_t>(begin), terms.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](const Term& x, const Term& y) { return lex_greater(x.left, y.left); });
    begin = end;
  }

  SchmidtDecomposition out;
  out.dims = psi.dims();
  out.weights.resize(r);
  const double total = std::accumulate(terms.begin(), terms.end(), 0.0, [](double a, const Term& t) { return a + t.weight; });
  for (Eigen::Index i = 0; i < r; ++i) {
    auto& t = terms[static_cast<std::size_t>(i)];
    out.weights(i) = total > 0.0 ? t.weight / total : t.weight;
    out.left_basis.push_back(std::move(t.left));
    out.right_basis.push_back(std::move(t.right));
  }
  return out;
}

/// −Σ w ln w with 0·ln 0 = 0.
inline double shannon_entropy(const RVector& weights) {
  double s = 0.0;
  for (double w : weights)
    if (w > tol::kSpectrumClip) s -= w * std::log(w);
  return std::max(s, 0.0);
}

/// Von Neumann entropy in nats.
inline double entropy(const DensityMatrix& rho) {
  if (!rho.is_physical()) throw NonPhysicalError("entropy of a non-physical (flagged) state");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
  RVector ev = es.eigenvalues();
  if (ev.minCoeff() < -tol::kNegativeEigenvalue) throw NonPhysicalError("entropy of a state with a negative eigenvalue");
  for (auto& v : ev)
    if (v < tol::kSpectrumClip) v = 0.0;
  return shannon_entropy(ev);
}

inline constexpr double nats_to_bits(double nats) { return nats / 0.69314718055994530942; }

/// Entanglement entropy of a bipartite pure state (entropy of either reduced state).
inline double entanglement_entropy(const PureState& psi) { return entropy(partial_trace(psi, Subsystem::A)); }

/// Uhlmann fidelity (Tr sqrt(sqrt(ρ) σ sqrt(ρ)))², clamped to [0,1].
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionError("fidelity of states with different dimensions");
  if (!rho.is_physical() || !sigma.is_physical()) throw NonPhysicalError("fidelity of a non-physical state");
  const CMatrix sr = detail::psd_sqrt(rho.matrix());
  const CMatrix inner = sr * sigma.matrix() * sr;
  const RVector ev = detail::clipped_spectrum(0.5 * (inner + inner.adjoint()));
  const double root = ev.cwiseSqrt().sum();
  return std::clamp(root * root, 0.0, 1.0);
}

/// |⟨ψ|φ⟩|²
inline double fidelity(const PureState& psi, const PureState& phi) { return std::clamp(std::norm(psi.inner(phi)), 0.0, 1.0); }

/// ½ Σ |eig(ρ − σ)|
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionError("trace distance of states with different dimensions");
  const CMatrix d = rho.matrix() - sigma.matrix();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace einsel
