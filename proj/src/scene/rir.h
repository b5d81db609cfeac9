// scene/rir.h
//
// Room impulse responses: loading metadata around measured taps, and a
// synthetic generator (unit direct path + exponentially decaying Gaussian
// tail) for machines without a RIR database.  The early/late split point —
// direct path plus a fixed early window — is what separates "desired" from
// "interfering" reverberation downstream.

#ifndef DEMIST_SCENE_RIR_H_
#define DEMIST_SCENE_RIR_H_

#include <cstdint>
#include <vector>

namespace demist {

struct Rir {
  std::vector<double> taps;
  int sample_rate = 16000;
  int direct_index = 0;           // argmax |taps|
  double early_boundary_ms = 50;  // early window after the direct path

  // Taps [0, early_len) are "early" (desired); the rest is late reverb.
  // Always at least direct_index+1 so the direct path itself stays early.
  int early_len() const;

  static Rir from_taps(std::vector<double> taps, int sample_rate, double early_boundary_ms);
};

// Decay envelope at t milliseconds after the direct path: 10^(-3 t / T60),
// i.e. -60 dB at t == t60_ms by construction.
double rir_decay_envelope(double t_ms, double t60_ms);

// Synthetic RIR: unit impulse at the direct delay, then zero-mean Gaussian
// taps shaped by rir_decay_envelope and scaled so the tail carries unit
// energy (0 dB direct-to-reverberant ratio).  t60_ms must lie in [100, 2000]
// and the response must be long enough to contain the decay.
Rir synth_rir(double t60_ms, double length_ms, double direct_delay_ms, uint64_t seed,
              int sample_rate = 16000, double early_boundary_ms = 50);

// Reverberation time via backward integration of the squared taps: least
// squares slope of the energy-decay curve between -5 and -25 dB, scaled to
// -60 dB.  Returns NaN when the response is too short to reach -25 dB.
double estimate_t60_schroeder(const std::vector<double>& taps, int sample_rate);

}  // namespace demist

#endif  // DEMIST_SCENE_RIR_H_
