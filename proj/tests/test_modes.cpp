#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "einsel/core.hpp"
#include "einsel/modes.hpp"

using namespace einsel;
using namespace einsel::modes;
using Catch::Matchers::WithinAbs;
using std::numbers::pi;

namespace {

OscillatorConfig resonant(std::size_t cutoff = 24) { return {1.0, 1.0, 0.1, cutoff, cutoff}; }

// Oracle propagator: diagonalize the whole matrix at once.
CVector dense_evolve(const Operator& h, const CVector& psi, double t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
  CVector phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::polar(1.0, -es.eigenvalues()(i) * t);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint() * psi;
}

}  // namespace

TEST_CASE("two-mode Hamiltonian", "[modes]") {
  SECTION("uncoupled Hamiltonian commutes with the mode-A number operator") {
    OscillatorConfig cfg{1.3, 0.7, 0.0, 6, 5};
    const auto h = build_hamiltonian(cfg);
    const ModeOperators ops(cfg);
    REQUIRE(commutator(h.full, ops.na).matrix().cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(h.interaction.matrix().cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("total excitation number is conserved") {
    for (const OscillatorConfig cfg : {OscillatorConfig{1.0, 1.0, 0.3, 6, 6}, OscillatorConfig{1.0, 2.5, 0.7, 5, 7}}) {
      const auto h = build_hamiltonian(cfg);
      const ModeOperators ops(cfg);
      REQUIRE(h.full.is_hermitian(1e-12));
      REQUIRE(commutator(h.full, ops.na + ops.nb).matrix().cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  SECTION("hand matrix elements of the single-excitation block") {
    const auto h = build_hamiltonian({0.0, 0.0, 1.0, 2, 2}).full.matrix();
    // index = n_A * 2 + n_B: |0,1> = 1, |1,0> = 2.
    REQUIRE(std::abs(h(1, 2) - cplx(0.0, -1.0)) < 1e-15);
    REQUIRE(std::abs(h(2, 1) - cplx(0.0, 1.0)) < 1e-15);
    REQUIRE(std::abs(h(1, 1)) < 1e-15);
    REQUIRE(std::abs(h(2, 2)) < 1e-15);
    REQUIRE(std::abs(h(0, 0)) < 1e-15);
  }
  SECTION("element-wise build matches the Kronecker-product construction") {
    const OscillatorConfig cfg{0.9, 1.3, 0.45, 5, 4};
    const ModeOperators ops(cfg);
    const CMatrix oracle = cfg.omega_a * ops.na.matrix() + cfg.omega_b * ops.nb.matrix() +
                           cplx(0.0, cfg.lambda) * (ops.a.matrix().adjoint() * ops.b.matrix() -
                                                    ops.a.matrix() * ops.b.matrix().adjoint());
    REQUIRE((build_hamiltonian(cfg).full.matrix() - oracle).cwiseAbs().maxCoeff() < 1e-14);
  }
  SECTION("invalid configurations are rejected") {
    REQUIRE_THROWS_AS(build_hamiltonian({1.0, 1.0, -0.1, 4, 4}), ValidationError);
    REQUIRE_THROWS_AS(build_hamiltonian({1.0, 1.0, 0.1, 1, 4}), ValidationError);
  }
}

TEST_CASE("block propagator matches dense diagonalization", "[modes]") {
  const OscillatorConfig cfg{1.0, 1.4, 0.35, 6, 5};
  const auto h = build_hamiltonian(cfg).full;
  const Propagator prop(h);
  REQUIRE(prop.block_count() == 6 + 5 - 1);  // one block per total excitation
  Rng rng(9);
  const auto psi = random_pure_state(cfg.dims(), rng);
  for (double t : {0.0, 0.7, 3.1, 12.0})
    REQUIRE((prop.evolve(psi, t).amplitudes() - dense_evolve(h, psi.amplitudes(), t)).norm() < 1e-12);
}

TEST_CASE("evolve", "[modes]") {
  const auto cfg = resonant();
  const CoupledModes model(cfg);
  SECTION("t = 0 is the identity") {
    const auto psi = coherent_product(cplx(0.4, -0.2), 0.9, cfg);
    REQUIRE((model.evolve(psi, 0.0).amplitudes() - psi.amplitudes()).norm() < 1e-13);
  }
  SECTION("single excitation swaps modes at lambda t = pi/2") {
    const auto psi = fock_product(1, 0, cfg);
    // Oracle: hand-exponentiated single-excitation block,
    // |1,0> -> e^{-i w t}(cos(lt)|1,0> - sin(lt)|0,1>).
    for (double lt : {0.3, pi / 4, pi / 2, 2.0}) {
      const double t = lt / cfg.lambda;
      const auto out = model.evolve(psi, t);
      const cplx rot = std::polar(1.0, -cfg.omega_a * t);
      const std::size_t i10 = 1 * cfg.cutoff_b + 0, i01 = 0 * cfg.cutoff_b + 1;
      REQUIRE(std::abs(out[i10] - rot * std::cos(lt)) < 1e-10);
      REQUIRE(std::abs(out[i01] + rot * std::sin(lt)) < 1e-10);
    }
    REQUIRE(fidelity(model.evolve(psi, pi / 2 / cfg.lambda), fock_product(0, 1, cfg)) >= 1.0 - 1e-9);
  }
  SECTION("coherent product follows the amplitude flow") {
    const double t = pi / 2 / cfg.lambda;
    const auto out = model.evolve(coherent_product(1.2, 0.0, cfg), t);
    const auto mu = amplitude_flow({1.2, 0.0}, cfg, t);
    REQUIRE(fidelity(out, coherent_product(mu.mu_a, mu.mu_b, cfg)) >= 1.0 - 1e-6);
  }
  SECTION("truncation guard") {
    const OscillatorConfig small{1.0, 1.0, 0.1, 8, 8};
    const auto crowded = tensor(coherent_state_unchecked(2.5, 8).state, fock_state(0, 8));
    REQUIRE_THROWS_AS(evolve(crowded, small, 1.0), TruncationError);
    // Guard also trips when evolution pushes population upward: |7,0> sits on the top level.
    REQUIRE_THROWS_AS(evolve(fock_product(7, 0, small), small, 1.0), TruncationError);
  }
  SECTION("dimension mismatch") {
    REQUIRE_THROWS_AS(model.evolve(fock_product(0, 0, resonant(10)), 1.0), DimensionError);
  }
}

TEST_CASE("amplitude flow", "[modes]") {
  SECTION("swap at lambda t = pi/2 with zero frequency") {
    const OscillatorConfig cfg{0.0, 0.0, 1.0, 24, 24};
    const auto mu = amplitude_flow({1.0, 0.0}, cfg, pi / 2);
    REQUIRE(std::abs(mu.mu_a) < 1e-15);
    REQUIRE(std::abs(mu.mu_b - cplx(-1.0)) < 1e-15);
    // Oracle: full Fock-space evolution of the coherent product and its first moments.
    const auto full = first_moments(evolve(coherent_product(1.0, 0.0, cfg), cfg, pi / 2));
    REQUIRE(std::abs(full.mu_a - mu.mu_a) < 1e-9);
    REQUIRE(std::abs(full.mu_b - mu.mu_b) < 1e-9);
  }
  SECTION("free rotation when uncoupled") {
    const OscillatorConfig cfg{1.7, 0.4, 0.0, 4, 4};
    const auto mu = amplitude_flow({cplx(0.3, 0.1), 0.5}, cfg, 2.2);
    REQUIRE(std::abs(mu.mu_a - std::polar(1.0, -1.7 * 2.2) * cplx(0.3, 0.1)) < 1e-14);
    REQUIRE(std::abs(mu.mu_b - std::polar(1.0, -0.4 * 2.2) * 0.5) < 1e-14);
  }
  SECTION("closed form agrees with the matrix exponential and conserves |mu_A|^2 + |mu_B|^2") {
    const auto cfg = resonant();
    const AmplitudePair start{cplx(0.8, -0.3), cplx(-0.2, 0.6)};
    for (double t = 0.0; t < 80.0; t += 3.7) {
      const auto closed = amplitude_flow(start, cfg, t);
      const auto expo = amplitude_flow_exponential(start, cfg, t);
      REQUIRE(std::abs(closed.mu_a - expo.mu_a) < 1e-12);
      REQUIRE(std::abs(closed.mu_b - expo.mu_b) < 1e-12);
      REQUIRE_THAT(closed.excitation(), WithinAbs(start.excitation(), 1e-12));
      REQUIRE(closed.time == t);
    }
  }
}

TEST_CASE("coherence defect", "[modes]") {
  const auto cfg = resonant();
  REQUIRE(coherence_defect(coherent_product(cplx(0.7, 0.2), -0.4, cfg)) < 1e-9);
  REQUIRE_THAT(coherence_defect(fock_product(1, 0, cfg)), WithinAbs(1.0, 1e-12));

  const CoupledModes model(cfg);
  const auto psi0 = coherent_product(1.2, cplx(0.0, 0.5), cfg);
  double worst = 0.0;
  for (double t : uniform_times(model.exchange_period(), 50)) worst = std::max(worst, coherence_defect(model.evolve(psi0, t)));
  REQUIRE(worst < 1e-6);
}

TEST_CASE("biorthogonal leakage", "[modes]") {
  const auto cfg = resonant();
  SECTION("coherent products do not couple to the biorthogonal subspace") {
    for (cplx ma : {cplx(0.0), cplx(1.2), cplx(-0.5, 0.9)})
      for (cplx mb : {cplx(0.0), cplx(0.3, -1.1)})
        REQUIRE(biorthogonal_leakage(coherent_state(ma, 24).state, coherent_state(mb, 24).state, cfg) <= 1e-7);
  }
  SECTION("|1>|0> leaks with norm lambda") {
    REQUIRE_THAT(biorthogonal_leakage(fock_state(1, 24), fock_state(0, 24), cfg), WithinAbs(cfg.lambda, 1e-12));
    OscillatorConfig strong = cfg;
    strong.lambda = 0.85;
    REQUIRE_THAT(biorthogonal_leakage(fock_state(1, 24), fock_state(0, 24), strong), WithinAbs(0.85, 1e-12));
  }
  SECTION("no coupling, no leakage") {
    OscillatorConfig free = cfg;
    free.lambda = 0.0;
    Rng rng(4);
    for (int i = 0; i < 10; ++i)
      REQUIRE(biorthogonal_leakage(random_pure_state({24}, rng), random_pure_state({24}, rng), free) == 0.0);
  }
  SECTION("unnormalized factors are rejected") {
    const PureState half(0.5 * fock_state(0, 24).amplitudes(), {24});
    REQUIRE_THROWS_AS(biorthogonal_leakage(half, fock_state(0, 24), cfg), ValidationError);
  }
}

TEST_CASE("EIN scan", "[modes]") {
  const auto cfg = resonant();
  SECTION("coherent products occupy the minimal-entropy stratum") {
    CandidateFamilies fam;
    fam.coherent = CoherentGrid{{0.5, 1.0, 1.5}, 4};
    fam.fock = FockPairs{3};
    fam.random = RandomProducts{4, 77};
    const auto report = ein_scan(cfg, fam);
    REQUIRE(report.samples == 64);
    REQUIRE_THAT(report.horizon, WithinAbs(2.0 * pi / cfg.lambda, 1e-12));
    REQUIRE(report.ranking.size() == 13 * 13 + 10 + 4);
    REQUIRE(report.coherent_products_minimal());
    // Oracle: direct evolve + entropy for one Fock candidate.
    const CoupledModes model(cfg);
    double sum = 0.0;
    for (double t : uniform_times(report.horizon, 64)) sum += entanglement_entropy(model.evolve(fock_product(2, 1, cfg), t));
    const auto it = std::find_if(report.ranking.begin(), report.ranking.end(), [](const auto& s) { return s.label == "fock(2,1)"; });
    REQUIRE(it != report.ranking.end());
    REQUIRE_THAT(it->mean_entropy, WithinAbs(sum / 64.0, 1e-12));
    for (std::size_t i = 1; i < report.ranking.size(); ++i)
      REQUIRE(report.ranking[i - 1].mean_entropy <= report.ranking[i].mean_entropy);
  }
  SECTION("vacuum alone has zero mean entropy") {
    CandidateFamilies fam;
    fam.coherent = CoherentGrid{{}, 0};
    const auto report = ein_scan(cfg, fam);
    REQUIRE(report.ranking.size() == 1);
    REQUIRE(report.ranking[0].mean_entropy < 1e-12);
  }
  SECTION("results do not depend on the thread count") {
    CandidateFamilies fam;
    fam.fock = FockPairs{2};
    fam.random = RandomProducts{3, 5};
    const auto serial = ein_scan(cfg, fam, std::nullopt, 16, 1);
    const auto parallel = ein_scan(cfg, fam, std::nullopt, 16, 4);
    for (std::size_t i = 0; i < serial.ranking.size(); ++i) {
      REQUIRE(serial.ranking[i].index == parallel.ranking[i].index);
      REQUIRE(serial.ranking[i].mean_entropy == parallel.ranking[i].mean_entropy);
    }
  }
  SECTION("truncation guard on candidates") {
    CandidateFamilies fam;
    fam.fock = FockPairs{9};
    REQUIRE_THROWS_AS(ein_scan(resonant(8), fam), TruncationError);
  }
}

TEST_CASE("coupled-mode invariants", "[modes][property]") {
  const auto cfg = resonant();
  const CoupledModes model(cfg);
  const ModeOperators ops(cfg);
  const auto times = uniform_times(model.exchange_period(), 64);

  SECTION("norm and total number are conserved") {
    Rng rng(12);
    const auto psi0 = tensor(random_pure_state({24}, rng, 8), random_pure_state({24}, rng, 8));
    const double n0 = (ops.na + ops.nb).expectation(psi0).real();
    for (double t : times) {
      const auto psi = model.evolve(psi0, t);
      REQUIRE_THAT(psi.norm(), WithinAbs(1.0, 1e-10));
      REQUIRE_THAT((ops.na + ops.nb).expectation(psi).real(), WithinAbs(n0, 1e-9));
    }
  }
  SECTION("coherent products stay unentangled coherent products") {
    for (auto [ma, mb] : {std::pair<cplx, cplx>{1.5, 0.0}, {cplx(0.0, 1.5), cplx(-1.0, 1.0)}, {0.3, cplx(1.1, -0.9)}}) {
      const auto tr = model.trajectory(coherent_product(ma, mb, cfg), times);
      REQUIRE(tr.max_defect() <= 1e-6);
      REQUIRE(tr.max_entropy() <= 1e-6);
      for (std::size_t i = 0; i < times.size(); ++i) {
        const auto mu = amplitude_flow({ma, mb}, cfg, times[i]);
        REQUIRE(std::abs(tr.moments[i].mu_a - mu.mu_a) <= 1e-6);
        REQUIRE(std::abs(tr.moments[i].mu_b - mu.mu_b) <= 1e-6);
      }
    }
  }
  SECTION("single excitation becomes maximally entangled and then disentangles") {
    const auto psi = fock_product(1, 0, cfg);
    REQUIRE_THAT(entanglement_entropy(model.evolve(psi, pi / 4 / cfg.lambda)), WithinAbs(std::numbers::ln2, 1e-6));
    REQUIRE(entanglement_entropy(model.evolve(psi, pi / 2 / cfg.lambda)) <= 1e-8);
  }
  SECTION("off resonance the matrix-exponential flow still tracks the first moments") {
    const OscillatorConfig off{1.0, 1.6, 0.25, 24, 24};
    const CoupledModes detuned(off);
    const auto tr = detuned.trajectory(coherent_product(cplx(0.9, 0.4), -0.6, off), uniform_times(60.0, 40));
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      const auto mu = amplitude_flow({cplx(0.9, 0.4), -0.6}, off, tr.times[i]);
      REQUIRE(std::abs(tr.moments[i].mu_a - mu.mu_a) <= 1e-6);
      REQUIRE(std::abs(tr.moments[i].mu_b - mu.mu_b) <= 1e-6);
    }
    REQUIRE(tr.max_defect() <= 1e-6);
  }
}
