#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "einsel/core/types.hpp"

namespace einsel::modes {

/// exp(−iHt) for a time-independent Hermitian H, by exact eigen-decomposition.
///
/// H is split into the connected components of its nonzero pattern (for the
/// exchange Hamiltonian these are the fixed total-excitation sectors) and each
/// block is diagonalized on its own.
class Propagator {
 public:
  explicit Propagator(const Operator& h) : dims_(h.dims()), dim_(h.dim()) {
    if (!h.is_hermitian(1e-12)) throw ValidationError("propagator requires a Hermitian generator");
    const CMatrix& m = h.matrix();
    const auto n = static_cast<Eigen::Index>(dim_);

    std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), Eigen::Index{0});
    auto find = [&](Eigen::Index x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        if (m(i, j) != cplx(0.0)) parent[find(i)] = find(j);

    std::vector<Eigen::Index> root_to_block(static_cast<std::size_t>(n), -1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto r = find(i);
      if (root_to_block[r] < 0) {
        root_to_block[r] = static_cast<Eigen::Index>(blocks_.size());
        blocks_.emplace_back();
      }
      blocks_[static_cast<std::size_t>(root_to_block[r])].indices.push_back(i);
    }
    for (auto& blk : blocks_) {
      const auto k = static_cast<Eigen::Index>(blk.indices.size());
      CMatrix sub(k, k);
      for (Eigen::Index r = 0; r < k; ++r)
        for (Eigen::Index c = 0; c < k; ++c) sub(r, c) = m(blk.indices[r], blk.indices[c]);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(sub);
      blk.energies = es.eigenvalues();
      blk.vectors = es.eigenvectors();
    }
  }

  std::size_t block_count() const noexcept { return blocks_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  PureState evolve(const PureState& psi, double t) const {
    if (psi.dim() != dim_) throw DimensionError("state dimension does not match the Hamiltonian");
    CVector out(static_cast<Eigen::Index>(dim_));
    for (const auto& blk : blocks_) {
      const auto k = static_cast<Eigen::Index>(blk.indices.size());
      CVector local(k);
      for (Eigen::Index r = 0; r < k; ++r) local(r) = psi.amplitudes()(blk.indices[r]);
      CVector coeff = blk.vectors.adjoint() * local;
      for (Eigen::Index r = 0; r < k; ++r) coeff(r) *= std::polar(1.0, -blk.energies(r) * t);
      local = blk.vectors * coeff;
      for (Eigen::Index r = 0; r < k; ++r) out(blk.indices[r]) = local(r);
    }
    return PureState(std::move(out), dims_);
  }

 private:
  struct Block {
    std::vector<Eigen::Index> indices;
    RVector energies;
    CMatrix vectors;
  };

  Dims dims_;
  std::size_t dim_;
  std::vector<Block> blocks_;
};

}  // namespace einsel::modes
