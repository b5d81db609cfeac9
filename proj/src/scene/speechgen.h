// scene/speechgen.h
//
// Self-contained speech-like and noise test material so the full pipeline —
// synthesis, training, enhancement, evaluation — runs on machines without
// any corpus.  The speech generator is a small source-filter synthesizer:
// a glottal pulse train driven through cascaded formant resonators,
// interleaved with fricative bursts and pauses, under a syllabic amplitude
// envelope.  Not natural speech, but it has the structure that matters
// here: harmonic voiced stretches, broadband bursts, silences, and
// formant movement.

#ifndef DEMIST_SCENE_SPEECHGEN_H_
#define DEMIST_SCENE_SPEECHGEN_H_

#include <cstdint>
#include <string>
#include <vector>

namespace demist {

// Deterministic utterance of round(seconds * sample_rate) samples, RMS
// normalized to about 0.08 with peaks kept inside [-0.95, 0.95].
std::vector<double> synth_speech(double seconds, uint64_t seed, int sample_rate = 16000);

// Noise kinds: "white", "pink", "hum" (mains harmonics + hiss), "amod"
// (slowly amplitude-modulated white), "band" (random bandpass), "babble"
// (several speech streams summed).  RMS normalized to 0.1.
std::vector<double> synth_noise(const std::string& kind, double seconds, uint64_t seed,
                                int sample_rate = 16000);

const std::vector<std::string>& noise_kinds();

}  // namespace demist

#endif  // DEMIST_SCENE_SPEECHGEN_H_
