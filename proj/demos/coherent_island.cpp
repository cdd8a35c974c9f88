// Coherent products stay unentangled under exchange coupling; Fock products do not.
// Prints S(t) for both and checks the coherent amplitudes against the closed form.

#include <cstdio>

#include "einsel/modes.hpp"

using namespace einsel;
using namespace einsel::modes;

int main() {
  OscillatorConfig cfg{.omega_a = 1.0, .omega_b = 1.0, .lambda = 0.1, .cutoff_a = 20, .cutoff_b = 20};
  const CoupledModes modes(cfg);
  const cplx mu_a{1.2, 0.0}, mu_b{0.0, 0.5};
  const auto coherent = coherent_product(mu_a, mu_b, cfg);
  const auto fock = fock_product(1, 0, cfg);
  const auto times = uniform_times(modes.exchange_period() / 2.0, 11);
  const auto tc = modes.trajectory(coherent, times);
  const auto tf = modes.trajectory(fock, times);

  std::printf("%8s  %12s  %12s  %12s\n", "t", "S coherent", "S fock", "|mu - flow|");
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto flow = amplitude_flow({mu_a, mu_b, 0.0}, cfg, times[i]);
    const double err = std::abs(tc.moments[i].mu_a - flow.mu_a) + std::abs(tc.moments[i].mu_b - flow.mu_b);
    std::printf("%8.3f  %12.3e  %12.6f  %12.3e\n", times[i], tc.entropies[i], tf.entropies[i], err);
  }
  std::printf("max entropy: coherent %.2e nats, fock %.4f nats\n", tc.max_entropy(), tf.max_entropy());
}
