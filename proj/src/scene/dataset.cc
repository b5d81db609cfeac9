#include "scene/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "io/wav.h"
#include "scene/speechgen.h"
#include "util/errors.h"
#include "util/rng.h"

namespace demist {

AudioPool::AudioPool(int sample_rate, uint64_t master_seed, double gen_noise_seconds,
                     double gen_speech_seconds)
    : sample_rate_(sample_rate),
      master_seed_(master_seed),
      gen_noise_seconds_(gen_noise_seconds),
      gen_speech_seconds_(gen_speech_seconds) {}

const std::vector<double>& AudioPool::speech(const std::string& path) {
  auto it = speech_.find(path);
  if (it != speech_.end()) return it->second;
  if (path.rfind("gen:", 0) == 0) {
    if (path != "gen:speech" && path.rfind("gen:speech:", 0) != 0)
      throw DataError("speech entry '" + path + "' is not a wav path or gen:speech:<n>");
    const uint64_t variant =
        path == "gen:speech"
            ? 0
            : static_cast<uint64_t>(parse_int(path.substr(11), "gen:speech variant"));
    const uint64_t seed = Rng::derive(Rng::derive(master_seed_, 0x73706368), variant);
    return speech_.emplace(path, synth_speech(gen_speech_seconds_, seed, sample_rate_))
        .first->second;
  }
  WavData wav = read_wav(path);
  if (wav.sample_rate != sample_rate_)
    throw DataError("speech file " + path + ": sample rate " + std::to_string(wav.sample_rate) +
                    " does not match dataset rate " + std::to_string(sample_rate_) +
                    " (no resampling)");
  if (wav.samples.empty()) throw DataError("speech file " + path + " is empty");
  return speech_.emplace(path, std::move(wav.samples)).first->second;
}

const std::vector<double>& AudioPool::noise(const std::string& ref, const std::string& split) {
  const std::string key = split + "|" + ref;
  auto it = noise_.find(key);
  if (it != noise_.end()) return it->second;
  if (ref.rfind("gen:", 0) == 0) {
    const std::string kind = ref.substr(4);
    int split_ord = 0;
    for (int s = 0; s < 3; ++s)
      if (split == kSplitNames[s]) split_ord = s;
    uint64_t kind_hash = 0;
    for (char c : kind) kind_hash = kind_hash * 131 + static_cast<unsigned char>(c);
    const uint64_t seed =
        Rng::derive(Rng::derive(master_seed_, 0x6e6f6973), kind_hash * 4 + split_ord);
    return noise_.emplace(key, synth_noise(kind, gen_noise_seconds_, seed, sample_rate_))
        .first->second;
  }
  WavData wav = read_wav(ref);
  if (wav.sample_rate != sample_rate_)
    throw DataError("noise file " + ref + ": sample rate " + std::to_string(wav.sample_rate) +
                    " does not match dataset rate " + std::to_string(sample_rate_));
  if (wav.samples.empty()) throw DataError("noise file " + ref + " is empty");
  return noise_.emplace(key, std::move(wav.samples)).first->second;
}

const Rir& AudioPool::rir(const RirSpec& spec, double early_boundary_ms) {
  const std::string key = spec.kind == RirSpec::Kind::File
                              ? "file|" + spec.path
                              : "synth|" + spec.label();
  auto it = rirs_.find(key);
  if (it != rirs_.end()) return it->second;
  if (spec.kind == RirSpec::Kind::Synth) {
    return rirs_
        .emplace(key, synth_rir(spec.t60_ms, spec.length_ms, spec.direct_delay_ms, spec.seed,
                                sample_rate_, early_boundary_ms))
        .first->second;
  }
  WavData wav = read_wav(spec.path);
  if (wav.sample_rate != sample_rate_)
    throw DataError("RIR file " + spec.path + ": sample rate " + std::to_string(wav.sample_rate) +
                    " does not match dataset rate " + std::to_string(sample_rate_));
  return rirs_.emplace(key, Rir::from_taps(std::move(wav.samples), sample_rate_, early_boundary_ms))
      .first->second;
}

SceneComponents build_scene(const SceneSpec& spec, const Manifest& m, AudioPool& pool) {
  const std::vector<double>& dry = pool.speech(spec.speech);
  const Rir& rir = pool.rir(spec.rir, m.early_boundary_ms);

  SceneComponents scene;
  scene.id = spec.id;
  scene.sample_rate = m.sample_rate;
  scene.snr_db = spec.snr_db;
  scene.t60_ms = spec.rir.kind == RirSpec::Kind::Synth
                     ? spec.rir.t60_ms
                     : estimate_t60_schroeder(rir.taps, rir.sample_rate);

  auto [early, late] = split_convolve(dry, rir);
  scene.x = std::move(early);
  scene.r = std::move(late);

  if (spec.snr_db.has_value()) {
    std::vector<double> rev(scene.x.size());
    for (size_t i = 0; i < rev.size(); ++i) rev[i] = scene.x[i] + scene.r[i];
    scene.n = mix_at_snr(rev, pool.noise(spec.noise, spec.split), *spec.snr_db, spec.seed);
  } else {
    scene.n.assign(scene.x.size(), 0.0);
  }

  scene.y.resize(scene.x.size());
  for (size_t i = 0; i < scene.y.size(); ++i) scene.y[i] = scene.x[i] + scene.r[i] + scene.n[i];
  return scene;
}

SceneIndexRow write_scene_wavs(const SceneComponents& scene, const std::string& dir,
                               const SceneSpec& spec) {
  double peak = 0;
  for (const auto* v : {&scene.x, &scene.r, &scene.n, &scene.y})
    for (double s : *v) peak = std::max(peak, std::abs(s));
  const double scale = peak > 0.95 ? 0.95 / peak : 1.0;

  auto scaled = [&](const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] * scale;
    return out;
  };
  long clipped = 0, c = 0;
  std::vector<int16_t> xi = quantize16(scaled(scene.x), &c);
  clipped += c;
  std::vector<int16_t> ri = quantize16(scaled(scene.r), &c);
  clipped += c;
  std::vector<int16_t> ni = quantize16(scaled(scene.n), &c);
  clipped += c;
  // y as the saturated integer sum keeps the on-disk decomposition exact.
  std::vector<int16_t> yi(xi.size());
  for (size_t i = 0; i < yi.size(); ++i) {
    int v = int(xi[i]) + int(ri[i]) + int(ni[i]);
    if (v > 32767) {
      v = 32767;
      ++clipped;
    } else if (v < -32768) {
      v = -32768;
      ++clipped;
    }
    yi[i] = static_cast<int16_t>(v);
  }

  namespace fs = std::filesystem;
  const fs::path base(dir);
  write_wav16((base / (scene.id + "_x.wav")).string(), xi, scene.sample_rate);
  write_wav16((base / (scene.id + "_r.wav")).string(), ri, scene.sample_rate);
  write_wav16((base / (scene.id + "_n.wav")).string(), ni, scene.sample_rate);
  write_wav16((base / (scene.id + "_y.wav")).string(), yi, scene.sample_rate);

  SceneIndexRow row;
  row.id = scene.id;
  row.split = spec.split;
  row.speech = spec.speech;
  row.rir_label = spec.rir.label();
  row.noise = spec.noise.empty() ? "none" : spec.noise;
  row.t60_ms = scene.t60_ms;
  row.snr_db = scene.snr_db;
  row.seed = spec.seed;
  row.num_samples = static_cast<long>(scene.y.size());
  row.sample_rate = scene.sample_rate;
  row.scale = scale;
  row.clipped = clipped;
  return row;
}

namespace {
constexpr const char* kIndexHeader =
    "id\tsplit\tspeech\trir\tt60_ms\tsnr_db\tnoise\tseed\tsamples\tsample_rate\tscale\tclipped";
}

void write_scene_index(const std::string& path, const std::vector<SceneIndexRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot create scene index: " + path);
  out << "# scene-index v1\n" << kIndexHeader << "\n";
  char buf[512];
  for (const auto& r : rows) {
    std::string snr = r.snr_db ? [&] {
      char b[32];
      std::snprintf(b, sizeof(b), "%g", *r.snr_db);
      return std::string(b);
    }()
                               : std::string("none");
    std::snprintf(buf, sizeof(buf), "%s\t%s\t%s\t%s\t%g\t%s\t%s\t%llu\t%ld\t%d\t%.8g\t%ld",
                  r.id.c_str(), r.split.c_str(), r.speech.c_str(), r.rir_label.c_str(), r.t60_ms,
                  snr.c_str(), r.noise.c_str(), static_cast<unsigned long long>(r.seed),
                  r.num_samples, r.sample_rate, r.scale, r.clipped);
    out << buf << "\n";
  }
  if (!out) throw DataError("short write: " + path);
}

std::vector<SceneIndexRow> read_scene_index(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scene index: " + path);
  std::string line;
  std::vector<SceneIndexRow> rows;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kIndexHeader)
        throw DataError(path + ": unexpected scene index header (wrong file or version?)");
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ss, field, '\t')) f.push_back(field);
    if (f.size() != 12)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 12 fields, got " +
                      std::to_string(f.size()));
    SceneIndexRow r;
    r.id = f[0];
    r.split = f[1];
    r.speech = f[2];
    r.rir_label = f[3];
    r.t60_ms = parse_double(f[4], path + " t60_ms");
    if (f[5] != "none") r.snr_db = parse_double(f[5], path + " snr_db");
    r.noise = f[6];
    r.seed = static_cast<uint64_t>(std::stoull(f[7]));
    r.num_samples = static_cast<long>(parse_int(f[8], path + " samples"));
    r.sample_rate = static_cast<int>(parse_int(f[9], path + " sample_rate"));
    r.scale = parse_double(f[10], path + " scale");
    r.clipped = static_cast<long>(parse_int(f[11], path + " clipped"));
    rows.push_back(std::move(r));
  }
  if (!header_seen) throw DataError(path + ": missing scene index header");
  return rows;
}

SceneComponents load_scene(const std::string& dir, const SceneIndexRow& row) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  SceneComponents scene;
  scene.id = row.id;
  scene.t60_ms = row.t60_ms;
  scene.snr_db = row.snr_db;
  auto load = [&](const char* suffix, std::vector<double>& dst) {
    WavData wav = read_wav((base / (row.id + suffix)).string());
    if (wav.sample_rate != row.sample_rate)
      throw DataError("scene " + row.id + ": sample rate mismatch against index");
    dst = std::move(wav.samples);
  };
  load("_x.wav", scene.x);
  load("_r.wav", scene.r);
  load("_n.wav", scene.n);
  load("_y.wav", scene.y);
  scene.sample_rate = row.sample_rate;
  if (scene.x.size() != scene.y.size() || scene.r.size() != scene.y.size() ||
      scene.n.size() != scene.y.size())
    throw DataError("scene " + row.id + ": component lengths disagree");
  return scene;
}

}  // namespace demist
