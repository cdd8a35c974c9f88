#pragma once

// Converts detector-level photon-counting parameters into the white-noise
// fraction used by the tomography simulator.

#include <array>

#include "einsel/photon/models.hpp"

namespace einsel::tomo {

struct NoiseBridge {
  double true_rate = 0.0;        // detected pairs per second
  double accidental_rate = 0.0;  // singles_a · singles_b · window
  double white_fraction = 0.0;   // accidental / (true + accidental)
};

/// Pairs at `pair_rate` seen by two detectors with a coincidence `window` (s).
/// Accidentals follow the singles-rate formula used for coincidence counting.
inline NoiseBridge noise_from_detectors(double pair_rate, const std::array<photon::DetectorModel, 2>& det, double window) {
  if (!(pair_rate > 0.0)) throw ValidationError("pair_rate must be > 0");
  if (!(window > 0.0)) throw ValidationError("coincidence window must be > 0");
  for (const auto& d : det) d.validate();
  NoiseBridge b;
  b.true_rate = pair_rate * det[0].efficiency * det[1].efficiency;
  const double singles_a = pair_rate * det[0].efficiency + det[0].dark_rate;
  const double singles_b = pair_rate * det[1].efficiency + det[1].dark_rate;
  b.accidental_rate = singles_a * singles_b * window;
  const double total = b.true_rate + b.accidental_rate;
  b.white_fraction = total > 0.0 ? b.accidental_rate / total : 1.0;
  return b;
}

}  // namespace einsel::tomo
