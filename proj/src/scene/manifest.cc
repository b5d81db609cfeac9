#include "scene/manifest.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>

#include "scene/speechgen.h"
#include "util/errors.h"
#include "util/rng.h"

namespace demist {

const char* const kSplitNames[3] = {"train", "validation", "test"};

std::string RirSpec::label() const {
  if (kind == Kind::File) return std::filesystem::path(path).filename().string();
  char buf[64];
  std::snprintf(buf, sizeof(buf), "synth:t60=%gms@%08llx", t60_ms,
                static_cast<unsigned long long>(seed & 0xffffffffULL));
  return buf;
}

namespace {

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.rfind("gen:", 0) == 0) return p;
  std::filesystem::path fp(p);
  if (fp.is_absolute() || base_dir.empty()) return p;
  return (std::filesystem::path(base_dir) / fp).lexically_normal().string();
}

// "gen:speech" or "gen:speech:<integer variant>".
void check_speech_ref(const std::string& ref) {
  if (ref.rfind("gen:", 0) != 0) return;
  if (ref == "gen:speech") return;
  if (ref.rfind("gen:speech:", 0) == 0) {
    parse_int(ref.substr(11), "gen:speech variant");
    return;
  }
  throw DataError("manifest: speech entry '" + ref +
                  "' is not a wav path or gen:speech:<n>");
}

void check_noise_ref(const std::string& ref) {
  if (ref.rfind("gen:", 0) != 0) return;
  const std::string kind = ref.substr(4);
  const auto& kinds = noise_kinds();
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
    throw DataError("manifest: unknown generated noise kind '" + kind + "'");
}

void check_disjoint(const std::string& what, const std::vector<std::string>& a,
                    const std::string& a_name, const std::vector<std::string>& b,
                    const std::string& b_name) {
  std::set<std::string> sa(a.begin(), a.end());
  for (const auto& f : b)
    if (sa.count(f))
      throw DataError("manifest: " + what + " '" + f + "' appears in both " + a_name + " and " +
                      b_name + " splits");
}

}  // namespace

Manifest Manifest::load(const std::string& path, std::optional<uint64_t> seed_override) {
  Config cfg = Config::parse_file(path);
  return parse(cfg, std::filesystem::path(path).parent_path().string(), seed_override);
}

Manifest Manifest::parse(const Config& cfg, const std::string& base_dir,
                         std::optional<uint64_t> seed_override) {
  Manifest m;
  m.seed = seed_override.value_or(cfg.get_u64_or("dataset", "seed", 0));
  m.sample_rate = static_cast<int>(cfg.get_int_or("dataset", "sample_rate", 16000));
  if (m.sample_rate <= 0) throw DataError("manifest: sample_rate must be positive");
  m.early_boundary_ms = cfg.get_double_or("dataset", "early_boundary_ms", 50.0);
  if (m.early_boundary_ms < 0) throw DataError("manifest: early_boundary_ms must be >= 0");
  m.gen_speech_seconds = cfg.get_double_or("speech", "gen_seconds", 5.0);
  if (m.gen_speech_seconds <= 0) throw DataError("manifest: gen_seconds must be positive");

  const std::string snr = cfg.get_or("mix", "snr_db", "none");
  if (trim(snr) == "none") {
    m.reverberant_only = true;
  } else {
    m.snr_grid = cfg.get_doubles("mix", "snr_db");
    if (m.snr_grid.empty()) throw DataError("manifest: [mix] snr_db is empty");
  }

  const double rir_length_ms = cfg.get_double_or("rir", "length_ms", 700.0);
  const double rir_delay_ms = cfg.get_double_or("rir", "direct_delay_ms", 2.0);
  const uint64_t rir_seed_root = Rng::derive(m.seed, 0x726972);  // "rir" stream

  ManifestSplit* splits[3] = {&m.train, &m.validation, &m.test};
  for (int s = 0; s < 3; ++s) {
    const std::string name = kSplitNames[s];
    for (const auto& p : cfg.get_all("speech", name)) {
      splits[s]->speech.push_back(resolve(base_dir, p));
      check_speech_ref(splits[s]->speech.back());
    }
    for (const auto& p : cfg.get_all("noise", name)) {
      splits[s]->noise.push_back(resolve(base_dir, p));
      check_noise_ref(splits[s]->noise.back());
    }
    int entry = 0;
    if (cfg.has("rir", name + "_t60_ms")) {
      for (double t60 : cfg.get_doubles("rir", name + "_t60_ms")) {
        RirSpec spec;
        spec.kind = RirSpec::Kind::Synth;
        spec.t60_ms = t60;
        spec.length_ms = std::max(rir_length_ms, t60);
        spec.direct_delay_ms = rir_delay_ms;
        spec.seed = Rng::derive(rir_seed_root, static_cast<uint64_t>(s) * 4096 + entry);
        splits[s]->rirs.push_back(spec);
        ++entry;
      }
    }
    for (const auto& p : cfg.get_all("rir", name)) {
      RirSpec spec;
      spec.kind = RirSpec::Kind::File;
      spec.path = resolve(base_dir, p);
      splits[s]->rirs.push_back(spec);
      ++entry;
    }
  }

  if (m.train.speech.empty() && m.validation.speech.empty() && m.test.speech.empty())
    throw DataError("manifest: no speech files in any split");
  for (int s = 0; s < 3; ++s) {
    if (splits[s]->speech.empty()) continue;
    const std::string name = kSplitNames[s];
    if (splits[s]->rirs.empty())
      throw DataError("manifest: split '" + name + "' has speech but no RIRs");
    if (!m.reverberant_only && splits[s]->noise.empty())
      throw DataError("manifest: split '" + name +
                      "' has speech and an SNR grid but no noise sources");
  }

  // Speech files and measured RIRs must not leak across splits.
  auto rir_files = [](const ManifestSplit& sp) {
    std::vector<std::string> out;
    for (const auto& r : sp.rirs)
      if (r.kind == RirSpec::Kind::File) out.push_back(r.path);
    return out;
  };
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      check_disjoint("speech file", splits[a]->speech, kSplitNames[a], splits[b]->speech,
                     kSplitNames[b]);
      check_disjoint("RIR file", rir_files(*splits[a]), kSplitNames[a], rir_files(*splits[b]),
                     kSplitNames[b]);
    }
  return m;
}

const ManifestSplit& Manifest::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "validation") return validation;
  if (name == "test") return test;
  throw DataError("unknown split: " + name);
}

std::vector<SceneSpec> plan_scenes(const Manifest& m) {
  std::vector<SceneSpec> out;
  const uint64_t scene_seed_root = Rng::derive(m.seed, 0x7363656e);  // "scen" stream
  uint64_t ordinal = 0;
  const ManifestSplit* splits[3] = {&m.train, &m.validation, &m.test};
  for (int s = 0; s < 3; ++s) {
    const ManifestSplit& sp = *splits[s];
    long within = 0;
    for (const auto& speech : sp.speech) {
      for (const auto& rir : sp.rirs) {
        if (m.reverberant_only) {
          SceneSpec spec;
          spec.split = kSplitNames[s];
          spec.speech = speech;
          spec.rir = rir;
          spec.seed = Rng::derive(scene_seed_root, ordinal++);
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%s_%05ld", kSplitNames[s], within++);
          spec.id = buf;
          out.push_back(std::move(spec));
          continue;
        }
        for (double snr : m.snr_grid) {
          for (const auto& noise : sp.noise) {
            SceneSpec spec;
            spec.split = kSplitNames[s];
            spec.speech = speech;
            spec.rir = rir;
            spec.noise = noise;
            spec.snr_db = snr;
            spec.seed = Rng::derive(scene_seed_root, ordinal++);
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%s_%05ld", kSplitNames[s], within++);
            spec.id = buf;
            out.push_back(std::move(spec));
          }
        }
      }
    }
  }
  return out;
}

}  // namespace demist
