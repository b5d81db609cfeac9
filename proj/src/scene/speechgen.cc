#include "scene/speechgen.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "util/errors.h"
#include "util/rng.h"

namespace demist {

namespace {

// Two-pole resonator with unit DC gain (y = A x + B y1 + C y2).
struct Resonator {
  double b = 0, c = 0, a = 1, y1 = 0, y2 = 0;
  void tune(double freq_hz, double bw_hz, int fs) {
    const double r = std::exp(-std::numbers::pi * bw_hz / fs);
    c = -r * r;
    b = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq_hz / fs);
    a = 1.0 - b - c;
  }
  double step(double x) {
    const double y = a * x + b * y1 + c * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

struct OnePoleLp {
  double a = 0.96, y1 = 0;
  double step(double x) { return y1 = a * y1 + (1.0 - a) * x; }
};

double rms(const std::vector<double>& x) {
  double acc = 0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : std::sqrt(acc / x.size());
}

void normalize_rms(std::vector<double>& x, double target) {
  const double r = rms(x);
  if (r <= 0) return;
  double g = target / r;
  double peak = 0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak * g > 0.95) g = 0.95 / peak;
  for (double& v : x) v *= g;
}

enum class Seg { Voiced, Nasal, Fric, Stop, Pause };

}  // namespace

std::vector<double> synth_speech(double seconds, uint64_t seed, int fs) {
  if (seconds <= 0) throw std::invalid_argument("synth_speech: non-positive duration");
  const size_t n = static_cast<size_t>(std::lround(seconds * fs));
  std::vector<double> out(n, 0.0);
  Rng rng(seed);

  // Per-utterance "speaker": pitch range, vocal-tract scale, speaking rate,
  // breathiness, vibrato, and a slow loudness prosody.
  const double f0_base = 80.0 * std::pow(240.0 / 80.0, rng.uniform());
  const double vt_scale = rng.uniform(0.85, 1.18);
  const double rate = rng.uniform(0.75, 1.4);
  const double breath = rng.uniform(0.01, 0.06);
  const double vib_rate = rng.uniform(4.0, 6.5);
  const double vib_depth = rng.uniform(0.005, 0.03);
  const double pros_rate = rng.uniform(0.3, 0.9);
  const double pros_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

  Resonator r1, r2, r3, fric_band, burst_band;
  OnePoleLp glottal1, glottal2;
  double phase = 1.0;  // emit a pulse immediately at voiced onset
  double prev_raw = 0.0;
  double f1 = 500, f2 = 1500, f3 = 2700;  // formant glide state
  double b1 = 90, b2 = 110, b3 = 150;     // bandwidth glide state
  double f0_walk = 0.0;                   // slow pitch wander, updated per pulse
  Seg seg = Seg::Voiced;
  size_t t = 0;

  while (t < n) {
    double dur_s = 0;
    double amp = 0;
    double gamma = 1.0;  // glide curvature: frac^gamma
    double f1a = f1, f2a = f2, f3a = f3, f1b = f1, f2b = f2, f3b = f3;
    double b1a = b1, b2a = b2, b3a = b3, b1b = b1, b2b = b2, b3b = b3;
    double voiced_gain = 1.0;
    bool voiced_src = false, fric_src = false;
    size_t closure = 0, ramp_len = static_cast<size_t>(0.012 * fs);
    switch (seg) {
      case Seg::Voiced: {
        dur_s = rng.uniform(0.06, 0.25) / rate;
        amp = rng.uniform(0.5, 1.0);
        gamma = rng.uniform(0.5, 2.0);
        // Vowel-ish formant targets and per-segment bandwidths.
        f1b = rng.uniform(280, 900) * vt_scale;
        f2b = rng.uniform(850, 2350) * vt_scale;
        f3b = rng.uniform(2350, 3250) * vt_scale;
        if (f2b < f1b + 250) f2b = f1b + 250;
        b1b = rng.uniform(60, 140);
        b2b = rng.uniform(80, 180);
        b3b = rng.uniform(120, 260);
        voiced_src = true;
        break;
      }
      case Seg::Nasal: {
        // Murmur: low damped first formant, weak upper structure.
        dur_s = rng.uniform(0.04, 0.12) / rate;
        amp = rng.uniform(0.3, 0.6);
        f1b = rng.uniform(250, 400) * vt_scale;
        f2b = rng.uniform(950, 1400) * vt_scale;
        f3b = rng.uniform(2200, 2700) * vt_scale;
        b1b = rng.uniform(150, 300);
        b2b = rng.uniform(250, 450);
        b3b = rng.uniform(300, 500);
        voiced_src = true;
        break;
      }
      case Seg::Fric: {
        dur_s = rng.uniform(0.04, 0.14) / rate;
        amp = rng.uniform(0.1, 0.4);
        fric_band.tune(rng.uniform(2000, 6800), rng.uniform(400, 1500), fs);
        fric_src = true;
        ramp_len = static_cast<size_t>(0.008 * fs);
        // Voiced fricative: keep a weak glottal buzz under the frication.
        if (rng.uniform() < 0.3) {
          voiced_src = true;
          voiced_gain = 0.35;
          f1b = f1a;
          f2b = f2a;
          f3b = f3a;
        }
        break;
      }
      case Seg::Stop: {
        // Silent closure, then a short broadband release burst.
        const double closure_s = rng.uniform(0.02, 0.07) / rate;
        const double burst_s = rng.uniform(0.005, 0.02);
        dur_s = closure_s + burst_s;
        amp = rng.uniform(0.4, 0.9);
        closure = static_cast<size_t>(std::lround(closure_s * fs));
        burst_band.tune(rng.uniform(800, 4500), rng.uniform(800, 2000), fs);
        ramp_len = static_cast<size_t>(0.0015 * fs);
        break;
      }
      case Seg::Pause: {
        dur_s = rng.uniform(0.04, 0.22) / rate;
        amp = 0;
        break;
      }
    }
    const size_t dur = std::max<size_t>(1, static_cast<size_t>(std::lround(dur_s * fs)));
    const size_t end = std::min(n, t + dur);
    const size_t active0 = std::min(end, t + closure);  // sources start here
    const size_t ramp = std::min<size_t>((end - active0) / 2, ramp_len);

    // Syllabic modulation with per-segment rate and depth.
    const double am_rate = rng.uniform(2.0, 7.0);
    const double am_depth = rng.uniform(0.10, 0.35);
    const double am_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

    for (size_t i = t; i < end; ++i) {
      if (i < active0) {
        prev_raw = 0;
        out[i] = 0;
        continue;
      }
      const double local = static_cast<double>(i - active0);
      const double frac =
          static_cast<double>(i - t) / static_cast<double>(end - t);
      double env = amp;
      if (ramp > 0) {
        if (local < ramp)
          env *= 0.5 - 0.5 * std::cos(std::numbers::pi * local / ramp);
        else if (end - i <= ramp)
          env *= 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(end - i) / ramp);
      }
      env *= (1.0 - am_depth) +
             am_depth * std::sin(2.0 * std::numbers::pi * am_rate * i / fs + am_phase);
      env *= 0.8 + 0.2 * (0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * pros_rate * i / fs +
                                               pros_phase));

      double raw = 0;
      if (voiced_src) {
        // Declining pitch with slow wander and vibrato; jitter per pulse.
        const double f0 = f0_base * (1.0 + f0_walk) *
                          (1.0 - 0.10 * static_cast<double>(i) / static_cast<double>(n)) *
                          (1.0 + vib_depth *
                                     std::sin(2.0 * std::numbers::pi * vib_rate * i / fs));
        phase += f0 / fs;
        double pulse = 0;
        if (phase >= 1.0) {
          phase -= 1.0;
          pulse = rng.uniform(0.8, 1.2);  // shimmer
          f0_walk = std::clamp(f0_walk + 0.015 * rng.normal(), -0.25, 0.3);
        }
        // Glottal shaping (-12 dB/oct) with aspiration, formant cascade,
        // radiation (+6 dB/oct via the difference below).
        const double g = glottal2.step(glottal1.step(pulse + breath * rng.normal()));
        const double w = std::pow(frac, gamma);
        r1.tune(f1a + (f1b - f1a) * w, b1a + (b1b - b1a) * w, fs);
        r2.tune(f2a + (f2b - f2a) * w, b2a + (b2b - b2a) * w, fs);
        r3.tune(f3a + (f3b - f3a) * w, b3a + (b3b - b3a) * w, fs);
        raw = r3.step(r2.step(r1.step(g))) * 55.0 * voiced_gain;
      }
      if (fric_src) raw += fric_band.step(rng.normal()) * 1.5;
      if (seg == Seg::Stop) raw += burst_band.step(rng.normal()) * 2.0;
      const double radiated = raw - prev_raw;
      prev_raw = raw;
      out[i] = env * radiated;
    }

    f1 = f1b;
    f2 = f2b;
    f3 = f3b;
    b1 = b1b;
    b2 = b2b;
    b3 = b3b;
    t = end;

    // Segment transitions, weighted towards voiced content.
    const double u = rng.uniform();
    const Seg prev = seg;
    switch (seg) {
      case Seg::Voiced:
        seg = u < 0.22   ? Seg::Fric
              : u < 0.40 ? Seg::Stop
              : u < 0.55 ? Seg::Nasal
              : u < 0.70 ? Seg::Pause
                         : Seg::Voiced;
        break;
      case Seg::Nasal:
        seg = u < 0.60 ? Seg::Voiced : (u < 0.72 ? Seg::Fric : (u < 0.84 ? Seg::Stop : Seg::Pause));
        break;
      case Seg::Fric:
        seg = u < 0.55 ? Seg::Voiced
              : u < 0.65 ? Seg::Stop
              : u < 0.80 ? Seg::Pause
              : u < 0.90 ? Seg::Nasal
                         : Seg::Fric;
        break;
      case Seg::Stop:
        seg = u < 0.75 ? Seg::Voiced : (u < 0.90 ? Seg::Fric : Seg::Nasal);
        break;
      case Seg::Pause:
        seg = u < 0.60 ? Seg::Voiced : (u < 0.78 ? Seg::Fric : Seg::Stop);
        break;
    }
    // Articulator reset after an occlusion: drop glide continuity sometimes.
    if ((prev == Seg::Stop || prev == Seg::Pause) && rng.uniform() < 0.45) {
      f1 = rng.uniform(280, 900) * vt_scale;
      f2 = rng.uniform(850, 2350) * vt_scale;
      f3 = rng.uniform(2350, 3250) * vt_scale;
      if (f2 < f1 + 250) f2 = f1 + 250;
    }
  }

  normalize_rms(out, 0.08);
  return out;
}

const std::vector<std::string>& noise_kinds() {
  static const std::vector<std::string> kinds = {"white", "pink",  "hum",
                                                 "amod",  "band", "babble"};
  return kinds;
}

std::vector<double> synth_noise(const std::string& kind, double seconds, uint64_t seed, int fs) {
  if (seconds <= 0) throw std::invalid_argument("synth_noise: non-positive duration");
  const size_t n = static_cast<size_t>(std::lround(seconds * fs));
  std::vector<double> out(n, 0.0);
  Rng rng(seed);

  if (kind == "white") {
    for (auto& v : out) v = rng.normal();
  } else if (kind == "pink") {
    // Paul Kellet's economy pink filter.
    double b0 = 0, b1 = 0, b2 = 0;
    for (auto& v : out) {
      const double w = rng.normal();
      b0 = 0.99765 * b0 + w * 0.0990460;
      b1 = 0.96300 * b1 + w * 0.2965164;
      b2 = 0.57000 * b2 + w * 1.0526913;
      v = b0 + b1 + b2 + w * 0.1848;
    }
  } else if (kind == "hum") {
    // Mains fundamental + odd-ish harmonics over a weak hiss bed.
    const double amps[] = {1.0, 0.5, 0.35, 0.2, 0.1};
    const double freqs[] = {50, 100, 150, 250, 350};
    double phases[5];
    for (auto& p : phases) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (size_t i = 0; i < n; ++i) {
      double v = 0;
      for (int h = 0; h < 5; ++h)
        v += amps[h] * std::sin(2.0 * std::numbers::pi * freqs[h] * i / fs + phases[h]);
      out[i] = v + 0.03 * rng.normal();
    }
  } else if (kind == "amod") {
    const double rate = rng.uniform(0.4, 2.0);
    const double ph = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (size_t i = 0; i < n; ++i) {
      const double env =
          0.25 + 0.75 * std::abs(std::sin(2.0 * std::numbers::pi * rate * i / fs + ph));
      out[i] = env * rng.normal();
    }
  } else if (kind == "band") {
    Resonator res;
    res.tune(rng.uniform(500, 3000), rng.uniform(200, 800), fs);
    for (auto& v : out) v = res.step(rng.normal());
  } else if (kind == "babble") {
    for (int talker = 0; talker < 6; ++talker) {
      auto voice = synth_speech(seconds, Rng::derive(seed, 100 + talker), fs);
      for (size_t i = 0; i < n && i < voice.size(); ++i) out[i] += voice[i];
    }
  } else {
    throw DataError("synth_noise: unknown noise kind '" + kind + "'");
  }

  normalize_rms(out, 0.1);
  return out;
}

}  // namespace demist
