#pragma once

// Local polarization measurements on a photon pair. Qubit basis |0> = H, |1> = V.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "einsel/core/ops.hpp"

namespace einsel::tomo {

using Mat2 = Eigen::Matrix2cd;

enum class SchemeKind { kMub, kSic };

inline const char* to_string(SchemeKind k) { return k == SchemeKind::kMub ? "mub" : "sic"; }

inline SchemeKind scheme_kind_from_string(const std::string& s) {
  if (s == "mub") return SchemeKind::kMub;
  if (s == "sic") return SchemeKind::kSic;
  throw ValidationError("unknown measurement scheme '" + s + "'");
}

namespace pauli {
inline Mat2 id() { return Mat2::Identity(); }
inline Mat2 x() { Mat2 m; m << 0, 1, 1, 0; return m; }
inline Mat2 y() { Mat2 m; m << 0, cplx(0, -1), cplx(0, 1), 0; return m; }
inline Mat2 z() { Mat2 m; m << 1, 0, 0, -1; return m; }
/// σ_0..σ_3 = I, X, Y, Z
inline Mat2 sigma(int k) {
  switch (k) {
    case 1: return x();
    case 2: return y();
    case 3: return z();
    default: return id();
  }
}
/// (I + n·σ)/2 scaled by `weight`
inline Mat2 bloch_projector(const std::array<double, 3>& n, double weight = 1.0) {
  return weight * 0.5 * (id() + n[0] * x() + n[1] * y() + n[2] * z());
}
}  // namespace pauli

struct LocalSetting {
  std::string label;
  std::vector<std::string> outcome_labels;
  std::vector<Mat2> effects;
};

struct JointCell {
  std::size_t setting;     // joint setting index
  std::size_t setting_a, setting_b, outcome_a, outcome_b;
  CMatrix effect;          // E_a ⊗ E_b
};

/// Same local measurement on both arms; joint settings and cells are enumerated
/// setting_a-major, then setting_b, outcome_a, outcome_b.
class MeasurementScheme {
 public:
  MeasurementScheme(SchemeKind kind, std::vector<LocalSetting> local) : kind_(kind), local_(std::move(local)) {
    for (std::size_t sa = 0; sa < local_.size(); ++sa)
      for (std::size_t sb = 0; sb < local_.size(); ++sb) {
        const std::size_t joint = sa * local_.size() + sb;
        for (std::size_t oa = 0; oa < local_[sa].effects.size(); ++oa)
          for (std::size_t ob = 0; ob < local_[sb].effects.size(); ++ob) {
            CMatrix e = Eigen::kroneckerProduct(CMatrix(local_[sa].effects[oa]), CMatrix(local_[sb].effects[ob])).eval();
            cells_.push_back({joint, sa, sb, oa, ob, std::move(e)});
          }
      }
    build_design();
  }

  SchemeKind kind() const noexcept { return kind_; }
  const std::vector<LocalSetting>& local_settings() const noexcept { return local_; }
  std::size_t joint_settings() const noexcept { return local_.size() * local_.size(); }
  std::size_t outcomes_per_setting() const { return cells_.size() / joint_settings(); }
  const std::vector<JointCell>& cells() const noexcept { return cells_; }

  std::string setting_label(std::size_t joint) const {
    return local_[joint / local_.size()].label + "," + local_[joint % local_.size()].label;
  }
  std::string outcome_label(const JointCell& c) const {
    return local_[c.setting_a].outcome_labels[c.outcome_a] + "," + local_[c.setting_b].outcome_labels[c.outcome_b];
  }

  /// Real design matrix D (cells × 16): p = D r for ρ = Σ_k r_k (σ_i ⊗ σ_j)/4, k = 4i + j.
  const Eigen::MatrixXd& design() const noexcept { return design_; }
  Eigen::Index design_rank() const {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design_);
    svd.setThreshold(1e-10);
    return svd.rank();
  }

 private:
  void build_design() {
    design_.resize(static_cast<Eigen::Index>(cells_.size()), 16);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const CMatrix b = Eigen::kroneckerProduct(CMatrix(pauli::sigma(i)), CMatrix(pauli::sigma(j))).eval() / 4.0;
        for (std::size_t c = 0; c < cells_.size(); ++c)
          design_(static_cast<Eigen::Index>(c), 4 * i + j) = (cells_[c].effect * b).trace().real();
      }
  }

  SchemeKind kind_;
  std::vector<LocalSetting> local_;
  std::vector<JointCell> cells_;
  Eigen::MatrixXd design_;
};

/// Pauli eigenbases: H/V (z), D/A (x), R/L (y).
inline MeasurementScheme scheme_mub() {
  std::vector<LocalSetting> s{
      {"HV", {"H", "V"}, {pauli::bloch_projector({0, 0, 1}), pauli::bloch_projector({0, 0, -1})}},
      {"DA", {"D", "A"}, {pauli::bloch_projector({1, 0, 0}), pauli::bloch_projector({-1, 0, 0})}},
      {"RL", {"R", "L"}, {pauli::bloch_projector({0, 1, 0}), pauli::bloch_projector({0, -1, 0})}},
  };
  return {SchemeKind::kMub, std::move(s)};
}

/// Tetrahedron Bloch vectors with the first at the north pole.
inline std::array<std::array<double, 3>, 4> sic_bloch_vectors() {
  const double r = std::sqrt(8.0 / 9.0);
  std::array<std::array<double, 3>, 4> v{};
  v[0] = {0.0, 0.0, 1.0};
  for (int k = 1; k < 4; ++k) {
    const double phi = 2.0 * std::numbers::pi * (k - 1) / 3.0;
    v[static_cast<std::size_t>(k)] = {r * std::cos(phi), r * std::sin(phi), -1.0 / 3.0};
  }
  return v;
}

/// Four effects ½|ψ_k><ψ_k| = (I + n_k·σ)/4.
inline MeasurementScheme scheme_sic() {
  LocalSetting s{"SIC", {"S0", "S1", "S2", "S3"}, {}};
  for (const auto& n : sic_bloch_vectors()) s.effects.push_back(pauli::bloch_projector(n, 0.5));
  return {SchemeKind::kSic, {std::move(s)}};
}

inline const MeasurementScheme& scheme(SchemeKind kind) {
  static const MeasurementScheme mub = scheme_mub();
  static const MeasurementScheme sic = scheme_sic();
  return kind == SchemeKind::kMub ? mub : sic;
}

}  // namespace einsel::tomo
