#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "einsel/core/random.hpp"
#include "einsel/tomo/scheme.hpp"

namespace einsel::tomo {

inline constexpr double kProbabilityFloor = 1e-12;

inline const Dims kTwoQubits{2, 2};

/// Born probabilities, one per joint cell in scheme order.
inline std::vector<double> born_probabilities(const DensityMatrix& rho, const MeasurementScheme& s) {
  if (rho.dims() != kTwoQubits) throw DimensionError("tomography expects a two-qubit state");
  if (!rho.is_physical()) throw NonPhysicalError("Born probabilities of a non-physical state");
  std::vector<double> p;
  p.reserve(s.cells().size());
  for (const auto& c : s.cells()) p.push_back((c.effect * rho.matrix()).trace().real());
  return p;
}

/// Counts per joint cell (scheme order). Counts are doubles so that exact
/// probability tables (p · shots) share the type with sampled ones.
struct CountTable {
  SchemeKind scheme = SchemeKind::kMub;
  double shots_per_setting = 0.0;
  std::vector<double> counts;

  const MeasurementScheme& measurement() const { return tomo::scheme(scheme); }

  static CountTable from_probabilities(SchemeKind kind, const std::vector<double>& p, double shots) {
    CountTable t{kind, shots, {}};
    for (double x : p) t.counts.push_back(x * shots);
    return t;
  }

  double setting_total(std::size_t joint) const {
    double acc = 0.0;
    const auto& cells = measurement().cells();
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (cells[i].setting == joint) acc += counts[i];
    return acc;
  }

  void validate() const {
    const auto& m = measurement();
    if (counts.size() != m.cells().size())
      throw ValidationError(std::string("count table for '") + to_string(scheme) + "' needs " +
                            std::to_string(m.cells().size()) + " cells, got " + std::to_string(counts.size()));
    if (!(shots_per_setting > 0.0)) throw ValidationError("shots_per_setting must be > 0");
    for (double c : counts)
      if (!(c >= 0.0)) throw ValidationError("counts must be nonnegative");
    for (std::size_t j = 0; j < m.joint_settings(); ++j)
      if (std::abs(setting_total(j) - shots_per_setting) > 1e-9 * shots_per_setting)
        throw ValidationError("counts of setting " + m.setting_label(j) + " do not sum to shots_per_setting");
  }
};

/// White noise fraction f mixed into every setting: p' = (1 − f) p + f / outcomes.
struct TomographyNoise {
  double white_fraction = 0.0;
};

/// Multinomial draws per joint setting; setting j uses RNG substream j of `seed`.
inline CountTable simulate_tomography(const DensityMatrix& rho, const MeasurementScheme& s, std::uint64_t shots,
                                      TomographyNoise noise, std::uint64_t seed) {
  if (shots < 1) throw ValidationError("shots per setting must be >= 1");
  const double f = noise.white_fraction;
  if (!(f >= 0.0 && f <= 1.0)) throw ValidationError("white noise fraction must lie in [0,1]");
  const auto p = born_probabilities(rho, s);
  const double uniform = 1.0 / static_cast<double>(s.outcomes_per_setting());

  CountTable t{s.kind(), static_cast<double>(shots), std::vector<double>(p.size(), 0.0)};
  for (std::size_t j = 0; j < s.joint_settings(); ++j) {
    Rng rng = make_rng(seed, j);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < s.cells().size(); ++i)
      if (s.cells()[i].setting == j) idx.push_back(i);
    std::uint64_t left = shots;
    double mass_left = 1.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double q = std::max(0.0, (1.0 - f) * p[idx[k]] + f * uniform);
      std::uint64_t n = left;
      if (k + 1 < idx.size()) {
        const double cond = mass_left > 0.0 ? std::clamp(q / mass_left, 0.0, 1.0) : 0.0;
        n = std::binomial_distribution<std::uint64_t>(left, cond)(rng);
      }
      t.counts[idx[k]] = static_cast<double>(n);
      left -= n;
      mass_left -= q;
    }
  }
  return t;
}

enum class Method { kLinearInversion, kMle };

inline const char* to_string(Method m) { return m == Method::kMle ? "mle" : "linear_inversion"; }

struct TomographyResult {
  DensityMatrix rho;
  Method method = Method::kLinearInversion;
  bool physical = true;
  double log_likelihood = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;   // mle: trace distance of the last undiluted RρR step; linear: least-squares residual norm
  bool converged = true;
  std::string diagnostics;
};

/// Σ n_i ln max(p_i(ρ), 1e-12)
inline double log_likelihood(const CountTable& t, const CMatrix& rho) {
  const auto& cells = t.measurement().cells();
  double ll = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (t.counts[i] == 0.0) continue;
    ll += t.counts[i] * std::log(std::max((cells[i].effect * rho).trace().real(), kProbabilityFloor));
  }
  return ll;
}

namespace detail {

inline CMatrix from_pauli_coordinates(const Eigen::VectorXd& r) {
  CMatrix rho = CMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      rho += r(4 * i + j) * Eigen::kroneckerProduct(CMatrix(pauli::sigma(i)), CMatrix(pauli::sigma(j))).eval() / 4.0;
  return rho;
}

/// Damped Newton proposal in the factor A of ρ = A A† / tr(A A†), with A = V √Λ.
/// In these coordinates a boundary optimum is an ordinary interior maximum, so
/// the step keeps its quadratic convergence where RρR crawls. Eigenvalues are
/// floored at `floor` so vanishing directions keep a gradient.
/// `damping` is relative to the total count; empty when the solve fails.
inline std::optional<CMatrix> factor_newton(const CMatrix& rho, const std::vector<JointCell>& cells,
                                           const std::vector<double>& counts, double damping, double floor = 1e-8) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  const RVector lambda = es.eigenvalues().cwiseMax(floor);
  const CMatrix a = es.eigenvectors() * lambda.cwiseSqrt().cast<cplx>().asDiagonal();

  // x = [Re col_0; Im col_0; ...]; a† E a = yᵀ [[Re E, −Im E], [Im E, Re E]] y per column
  constexpr int kN = 32;
  using Vec = Eigen::Matrix<double, kN, 1>;
  using Mat = Eigen::Matrix<double, kN, kN>;
  Vec x;
  for (int c = 0; c < 4; ++c) {
    x.segment<4>(8 * c) = a.col(c).real();
    x.segment<4>(8 * c + 4) = a.col(c).imag();
  }
  Vec g = Vec::Zero();
  Mat h = Mat::Zero();
  double total = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (counts[i] == 0.0) continue;
    total += counts[i];
    Eigen::Matrix<double, 8, 8> b;
    b << cells[i].effect.real(), -cells[i].effect.imag(), cells[i].effect.imag(), cells[i].effect.real();
    Mat q = Mat::Zero();
    for (int c = 0; c < 4; ++c) q.block<8, 8>(8 * c, 8 * c) = b;
    const Vec qx = q * x;
    const double qi = std::max(x.dot(qx), kProbabilityFloor);
    g += (2.0 * counts[i] / qi) * qx;
    h += (2.0 * counts[i] / qi) * q - (4.0 * counts[i] / (qi * qi)) * qx * qx.transpose();
  }
  const double s = x.squaredNorm();
  g -= (2.0 * total / s) * x;
  h -= (2.0 * total / s) * Mat::Identity() - (4.0 * total / (s * s)) * x * x.transpose();

  const Mat m = -h + damping * total * Mat::Identity();
  Eigen::LDLT<Mat> ldlt(m);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
  const Vec d = ldlt.solve(g);
  if (!d.allFinite()) return std::nullopt;
  const Vec y = x + d;
  CMatrix b(4, 4);
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r) b(r, c) = cplx(y(8 * c + r), y(8 * c + 4 + r));
  CMatrix next = b * b.adjoint();
  next /= next.trace().real();
  return next;
}

inline double trace_norm(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

inline double min_eigenvalue(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace detail

/// Least-squares inversion of the Born map with the trace coordinate pinned to 1.
inline TomographyResult linear_inversion(const CountTable& t) {
  t.validate();
  const auto& s = t.measurement();
  const Eigen::MatrixXd& d = s.design();
  if (s.design_rank() != 16) throw NumericError("measurement scheme is not informationally complete");

  Eigen::VectorXd freq(static_cast<Eigen::Index>(t.counts.size()));
  for (std::size_t i = 0; i < t.counts.size(); ++i) freq(static_cast<Eigen::Index>(i)) = t.counts[i] / t.shots_per_setting;
  // r_0 = 1 fixes Tr ρ = 1; solve for the remaining 15 coordinates.
  const Eigen::VectorXd rhs = freq - d.col(0);
  const Eigen::MatrixXd rest = d.rightCols(15);
  const Eigen::VectorXd sol = rest.colPivHouseholderQr().solve(rhs);
  Eigen::VectorXd r(16);
  r(0) = 1.0;
  r.tail(15) = sol;

  CMatrix rho = detail::from_pauli_coordinates(r);
  rho = (0.5 * (rho + rho.adjoint())).eval();
  TomographyResult out{DensityMatrix::flagged(rho, kTwoQubits), Method::kLinearInversion};
  out.physical = out.rho.is_physical();
  out.log_likelihood = log_likelihood(t, rho);
  out.residual = (rest * sol - rhs).norm();
  if (!out.physical) out.diagnostics = "estimate has negative eigenvalue " + std::to_string(out.rho.min_eigenvalue());
  return out;
}

struct MleOptions {
  double tolerance = 1e-9;        // stop once both the accepted step and the undiluted RρR step move ρ by less than this (trace distance)
  std::size_t max_iterations = 10000;
  double min_dilution = 1e-10;
  double max_dilution = 64.0;
};

/// Fixed-point RρR iteration with adaptive dilution: ρ ← (I + εX)ρ(I + εX)/Tr with
/// X = R/N − I, R = Σ (n_i/p_i) E_i and N the total count (X = 0 at the optimum).
/// ε = 1 is the plain RρR step. ε is halved until the likelihood does not drop and
/// grows by 1.5 after each accepted step (capped), which speeds up the slow linear
/// tail of the plain iteration. Every step is a congruence, so ρ stays positive.
/// Each iteration first tries a damped Newton step in the factor A of ρ = AA†/tr,
/// kept only if the likelihood does not drop.
/// Convergence also requires R/N ≤ I (the optimality condition on the boundary)
/// up to 100 × tolerance; a violated direction is mixed back in.
/// `ll_trace`, when given, receives the log-likelihood after every accepted step.
inline TomographyResult mle_reconstruct(const CountTable& t, const MleOptions& opt = {},
                                        std::vector<double>* ll_trace = nullptr) {
  t.validate();
  const auto& cells = t.measurement().cells();
  const auto& s = t.measurement();
  if (s.design_rank() != 16) throw NumericError("measurement scheme is not informationally complete");

  // Σ E_i = settings · I, so R / N → I at the optimum
  double total = 0.0;
  for (double c : t.counts) total += c;
  const CMatrix id = CMatrix::Identity(4, 4);

  const auto probabilities = [&](const CMatrix& m) {
    std::vector<double> p(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) p[i] = std::max((cells[i].effect * m).trace().real(), kProbabilityFloor);
    return p;
  };
  CMatrix rho = id / 4.0;
  std::vector<double> p = probabilities(rho);
  double ll = log_likelihood(t, rho);
  if (ll_trace) ll_trace->push_back(ll);

  TomographyResult out{DensityMatrix::maximally_mixed(kTwoQubits), Method::kMle};
  out.converged = false;
  double eps = 1.0;
  const double kkt_tolerance = 100.0 * opt.tolerance;
  double damping = 1e-6;
  double last_step = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (; it < opt.max_iterations; ++it) {
    CMatrix r = CMatrix::Zero(4, 4);
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (t.counts[i] != 0.0) r += (t.counts[i] / p[i]) * cells[i].effect;
    r /= total;

    // fixed-point residual: trace distance moved by the undiluted RρR step
    CMatrix plain = r * rho * r;
    plain /= plain.trace().real();
    out.residual = 0.5 * detail::trace_norm(plain - rho);
    Eigen::SelfAdjointEigenSolver<CMatrix> r_es(r);
    const double kkt_excess = r_es.eigenvalues()(3) - 1.0;
    const CVector top_vector = r_es.eigenvectors().col(3);
    if (out.residual < opt.tolerance && last_step < opt.tolerance && kkt_excess <= kkt_tolerance) {
      out.converged = true;
      break;
    }

    const auto gain = [&](const CMatrix& m, std::vector<double>& np) {
      double d = 0.0;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const double dp = (cells[i].effect * m).trace().real();
        np[i] = std::max(p[i] + dp, kProbabilityFloor);
        if (t.counts[i] != 0.0) d += t.counts[i] * std::log1p((np[i] - p[i]) / p[i]);
      }
      return d;
    };
    std::vector<double> next_p(cells.size());
    CMatrix move;
    double delta = 0.0;

    // Newton in factor coordinates, with Levenberg-Marquardt damping carried
    // between iterations. Kept only if the likelihood does not drop.
    bool accepted = false;
    for (; damping <= 1e6 && !accepted; damping *= 10.0) {
      const auto next = detail::factor_newton(rho, cells, t.counts, damping);
      if (!next) continue;
      move = *next - rho;
      delta = gain(move, next_p);
      accepted = delta >= 0.0;
    }
    damping = accepted ? std::max(damping / 100.0, 1e-12) : 1e-6;
    // Directions lost to the floor come back if the optimality condition
    // R/N ≤ I is violated along them.
    if (!accepted && kkt_excess > kkt_tolerance) {
      const CMatrix vv = top_vector * top_vector.adjoint();
      for (double eta = 0.5; eta >= 1e-12 && !accepted; eta *= 0.5) {
        move = eta * (vv - rho);
        delta = gain(move, next_p);
        accepted = delta > 0.0;
      }
    }
    if (accepted) {
      rho += move;
      rho = (0.5 * (rho + rho.adjoint())).eval();
      last_step = 0.5 * detail::trace_norm(move);
      p = probabilities(rho);
      ll += delta;
      if (ll_trace) ll_trace->push_back(ll);
      continue;
    }

    // The move D = ρ' − ρ is formed directly from X = R/N − I so that tiny steps
    // near the optimum are not lost to cancellation in ρ' − ρ.
    const CMatrix x = r - id;
    const CMatrix lin = x * rho + rho * x.adjoint();
    const CMatrix quad = x * rho * x.adjoint();
    const double lin_tr = lin.trace().real(), quad_tr = quad.trace().real();
    for (; eps >= opt.min_dilution; eps *= 0.5) {
      const double tau = 1.0 + eps * lin_tr + eps * eps * quad_tr;
      move = (eps * lin + eps * eps * quad - (eps * lin_tr + eps * eps * quad_tr) * rho) / tau;
      move = (0.5 * (move + move.adjoint())).eval();
      delta = gain(move, next_p);
      if (delta >= 0.0) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.diagnostics = "stalled: no likelihood-increasing step above minimum dilution, fixed-point residual " +
                        std::to_string(out.residual);
      break;
    }
    rho += move;
    last_step = 0.5 * detail::trace_norm(move);
    p = probabilities(rho);
    ll += delta;
    eps = std::min(1.5 * eps, opt.max_dilution);
    if (ll_trace) ll_trace->push_back(ll);
  }
  out.iterations = it;
  if (!out.converged && out.diagnostics.empty())
    out.diagnostics = "reached max_iterations=" + std::to_string(opt.max_iterations) +
                      " with last step " + std::to_string(out.residual);
  // RρR keeps ρ positive semidefinite; strip round-off before the strict check
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  RVector w = es.eigenvalues().cwiseMax(0.0);
  w /= w.sum();
  rho = es.eigenvectors() * w.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  out.rho = DensityMatrix(rho, kTwoQubits);
  out.physical = true;
  out.log_likelihood = log_likelihood(t, rho);
  return out;
}

}  // namespace einsel::tomo
