#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

#include "einsel/core/error.hpp"

namespace einsel {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

/// Local (subsystem) dimensions of a composite Hilbert space.
using Dims = std::vector<std::size_t>;

namespace tol {
inline constexpr double kNormalized = 1e-12;
inline constexpr double kHermitian = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kNegativeEigenvalue = 1e-8;  // physicality threshold
inline constexpr double kSpectrumClip = 1e-12;       // eigenvalues below are zeroed
}  // namespace tol

inline std::size_t product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

namespace detail {

inline void check_dims(const Dims& dims, Eigen::Index dim) {
  if (dims.empty()) throw DimensionError("empty local dimension list");
  for (auto d : dims)
    if (d == 0) throw DimensionError("zero local dimension");
  if (product(dims) != static_cast<std::size_t>(dim))
    throw DimensionError("dimension does not match product of local dimensions");
}

// Smallest eigenvalue of a Hermitian matrix.
inline double min_eigenvalue(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace detail

/// Pure state: an amplitude vector over a (possibly composite) basis.
class PureState {
 public:
  PureState(CVector amplitudes, Dims dims) : amp_(std::move(amplitudes)), dims_(std::move(dims)) {
    detail::check_dims(dims_, amp_.size());
  }

  const CVector& amplitudes() const noexcept { return amp_; }
  const Dims& dims() const noexcept { return dims_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(amp_.size()); }
  cplx operator[](std::size_t i) const { return amp_(static_cast<Eigen::Index>(i)); }

  double norm() const { return amp_.norm(); }

  PureState normalized() const {
    const double n = amp_.norm();
    if (n == 0.0) throw NumericError("cannot normalize the zero vector");
    return PureState(amp_ / n, dims_);
  }

  /// ⟨this|other⟩
  cplx inner(const PureState& other) const {
    if (other.dim() != dim()) throw DimensionError("inner product of states with different dimensions");
    return amp_.dot(other.amp_);
  }

  /// Computational basis vector |index⟩.
  static PureState basis(std::size_t index, Dims dims) {
    CVector v = CVector::Zero(static_cast<Eigen::Index>(product(dims)));
    if (index >= static_cast<std::size_t>(v.size())) throw DimensionError("basis index out of range");
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return PureState(std::move(v), std::move(dims));
  }

 private:
  CVector amp_;
  Dims dims_;
};

/// Square complex matrix acting on a space with declared local dimensions.
class Operator {
 public:
  Operator(CMatrix entries, Dims dims) : m_(std::move(entries)), dims_(std::move(dims)) {
    if (m_.rows() != m_.cols()) throw DimensionError("operator matrix is not square");
    detail::check_dims(dims_, m_.rows());
  }

  static Operator identity(Dims dims) {
    const auto n = static_cast<Eigen::Index>(product(dims));
    return Operator(CMatrix::Identity(n, n), std::move(dims));
  }

  const CMatrix& matrix() const noexcept { return m_; }
  const Dims& dims() const noexcept { return dims_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }

  Operator adjoint() const { return Operator(m_.adjoint(), dims_); }

  PureState apply(const PureState& psi) const {
    if (psi.dim() != dim()) throw DimensionError("operator/state dimension mismatch");
    return PureState(m_ * psi.amplitudes(), dims_);
  }

  /// ⟨ψ|O|ψ⟩
  cplx expectation(const PureState& psi) const {
    if (psi.dim() != dim()) throw DimensionError("operator/state dimension mismatch");
    return psi.amplitudes().dot(m_ * psi.amplitudes());
  }

  bool is_hermitian(double tolerance = tol::kHermitian) const {
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tolerance;
  }

  friend Operator operator*(const Operator& x, const Operator& y) {
    if (x.dim() != y.dim()) throw DimensionError("operator product dimension mismatch");
    return Operator(x.m_ * y.m_, x.dims_);
  }
  friend Operator operator+(const Operator& x, const Operator& y) {
    if (x.dim() != y.dim()) throw DimensionError("operator sum dimension mismatch");
    return Operator(x.m_ + y.m_, x.dims_);
  }
  friend Operator operator-(const Operator& x, const Operator& y) {
    if (x.dim() != y.dim()) throw DimensionError("operator difference dimension mismatch");
    return Operator(x.m_ - y.m_, x.dims_);
  }
  friend Operator operator*(cplx s, const Operator& x) { return Operator(s * x.m_, x.dims_); }

 private:
  CMatrix m_;
  Dims dims_;
};

inline Operator commutator(const Operator& x, const Operator& y) { return x * y - y * x; }

/// Hermitian, unit-trace matrix. Positivity is verified on construction unless
/// the caller explicitly asks for a flagged (possibly non-positive) estimate.
class DensityMatrix {
 public:
  DensityMatrix(CMatrix entries, Dims dims) : DensityMatrix(std::move(entries), std::move(dims), Mode::kStrict) {}

  /// For estimators whose output may leave the positive cone; never throws on
  /// negativity but records it in is_physical().
  static DensityMatrix flagged(CMatrix entries, Dims dims) {
    return DensityMatrix(std::move(entries), std::move(dims), Mode::kFlagged);
  }

  static DensityMatrix from_pure(const PureState& psi) {
    const auto& a = psi.amplitudes();
    const double n2 = a.squaredNorm();
    if (std::abs(n2 - 1.0) > tol::kTrace) throw NonPhysicalError("pure state is not normalized");
    return DensityMatrix(a * a.adjoint(), psi.dims(), Mode::kTrusted);
  }

  static DensityMatrix maximally_mixed(Dims dims) {
    const auto n = static_cast<Eigen::Index>(product(dims));
    return DensityMatrix(CMatrix::Identity(n, n) / static_cast<double>(n), std::move(dims), Mode::kTrusted);
  }

  const CMatrix& matrix() const noexcept { return m_; }
  const Dims& dims() const noexcept { return dims_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  cplx operator()(std::size_t r, std::size_t c) const {
    return m_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  bool is_physical() const noexcept { return physical_; }
  /// Smallest eigenvalue; 0 for states whose positivity is structural (pure, mixtures of known states).
  double min_eigenvalue() const noexcept { return min_eig_; }

  /// Spectrum in ascending order.
  RVector eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  double purity() const { return (m_ * m_).trace().real(); }

  DensityMatrix conjugated_by(const CMatrix& u) const {
    return DensityMatrix(u * m_ * u.adjoint(), dims_, physical_ ? Mode::kTrusted : Mode::kFlagged);
  }

  /// Convex mixture p·this + (1−p)·other.
  DensityMatrix mix(const DensityMatrix& other, double p) const {
    if (other.dim() != dim()) throw DimensionError("mixture of states with different dimensions");
    if (p < 0.0 || p > 1.0) throw ValidationError("mixing weight outside [0,1]");
    const bool ok = physical_ && other.physical_;
    return DensityMatrix(p * m_ + (1.0 - p) * other.m_, dims_, ok ? Mode::kTrusted : Mode::kFlagged);
  }

 private:
  enum class Mode { kStrict, kFlagged, kTrusted };

  DensityMatrix(CMatrix entries, Dims dims, Mode mode) : m_(std::move(entries)), dims_(std::move(dims)) {
    if (m_.rows() != m_.cols()) throw DimensionError("density matrix is not square");
    detail::check_dims(dims_, m_.rows());
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > tol::kHermitian)
      throw NonPhysicalError("density matrix is not Hermitian");
    if (std::abs(m_.trace() - cplx(1.0)) > tol::kTrace) throw NonPhysicalError("density matrix trace differs from 1");
    m_ = (0.5 * (m_ + m_.adjoint())).eval();
    if (mode == Mode::kTrusted) return;
    min_eig_ = detail::min_eigenvalue(m_);
    physical_ = min_eig_ >= -tol::kNegativeEigenvalue;
    if (mode == Mode::kStrict && !physical_) throw NonPhysicalError("density matrix has a negative eigenvalue");
  }

  CMatrix m_;
  Dims dims_;
  double min_eig_ = 0.0;
  bool physical_ = true;
};

/// Biorthogonal expansion |ψ⟩ = Σ_i sqrt(w_i) |l_i⟩|r_i⟩, weights descending.
struct SchmidtDecomposition {
  RVector weights;
  std::vector<CVector> left_basis;
  std::vector<CVector> right_basis;
  Dims dims;

  std::size_t rank(double threshold = 1e-12) const {
    return static_cast<std::size_t>((weights.array() > threshold).count());
  }

  /// Σ_i sqrt(w_i) l_i ⊗ r_i
  PureState reconstruct() const {
    const auto na = static_cast<Eigen::Index>(dims.at(0));
    const auto nb = static_cast<Eigen::Index>(dims.at(1));
    CVector out = CVector::Zero(na * nb);
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      const double s = std::sqrt(std::max(weights(i), 0.0));
      for (Eigen::Index a = 0; a < na; ++a) out.segment(a * nb, nb) += s * left_basis[i](a) * right_basis[i];
    }
    return PureState(std::move(out), dims);
  }
};

}  // namespace einsel
