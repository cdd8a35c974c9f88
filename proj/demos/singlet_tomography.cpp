// Measure a slightly noisy singlet with both schemes, reconstruct it by MLE and
// read off the entanglement figures.

#include <cstdio>

#include "einsel/tomo.hpp"

using namespace einsel;
using namespace einsel::tomo;

int main() {
  const auto truth = werner(0.98);
  std::printf("truth: C = %.4f, S_max = %.4f\n", concurrence(truth), chsh_optimize(truth).value);
  for (auto kind : {SchemeKind::kMub, SchemeKind::kSic}) {
    const auto counts = simulate_tomography(truth, scheme(kind), 100000, {0.0}, 7);
    const auto li = linear_inversion(counts);
    const auto ml = mle_reconstruct(counts);
    std::printf("%s: linear inversion min eigenvalue %+.2e; mle %zu iterations, F = %.5f, C = %.4f, W = %.4f, S = %.4f\n",
                to_string(kind), li.rho.min_eigenvalue(), ml.iterations, fidelity(ml.rho, truth),
                concurrence(ml.rho), witness_value(ml.rho), chsh_optimize(ml.rho).value);
  }
}
