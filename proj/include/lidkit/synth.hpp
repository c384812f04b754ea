// Copyright 2026 The lidkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Synthetic speech-like corpus generator. Each "language" is a distinct
// stable AR(8) vocal-tract filter (four resonance pairs on stratified
// frequency slots) plus pitch statistics; each "speaker" perturbs the
// resonances and pitch with a small seeded jitter. Excitation is a pitch
// pulse train plus noise, with a slow syllable-like amplitude envelope.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "lidkit/audio.hpp"
#include "lidkit/common.hpp"
#include "lidkit/parallel.hpp"

namespace lidkit {

struct SynthOptions {
  std::size_t n_languages = 4;
  std::size_t n_speakers = 7;
  double utterance_seconds = 60.0;
  int sample_rate = 16000;
  std::uint64_t seed = 42;
  std::size_t workers = 1;
};

struct SynthResult {
  std::string manifest_path;
  std::vector<std::string> wav_paths;
};

namespace synth_detail {

inline constexpr std::size_t kResonances = 4;

struct ResonanceBand {
  double lo, hi;
};

inline constexpr ResonanceBand kBands[kResonances] = {
    {300.0, 850.0}, {900.0, 2200.0}, {2300.0, 3400.0}, {3500.0, 4800.0}};
inline constexpr double kPitchLo = 90.0, kPitchHi = 230.0;

struct VoiceSpec {
  double resonance_hz[kResonances];
  double bandwidth_hz[kResonances];
  double pitch_hz;
  double noise_mix;
  double vibrato_hz;
  double vibrato_depth;
  double syllable_hz;
  double phase_a, phase_b;
};

struct LanguageSpec {
  double resonance_hz[kResonances];
  double bandwidth_hz[kResonances];
  double pitch_hz;
  double noise_mix;
};

// Languages draw their resonances from disjoint slots of each band (slot
// order is a seeded permutation), so any two languages differ in every
// resonance by at least a slot width while speakers only jitter within it.
inline LanguageSpec make_language(std::uint64_t seed, std::size_t language,
                                  std::size_t n_languages) {
  Rng perm_rng(derive_seed(seed, 0, 0));
  std::vector<std::vector<std::size_t>> slots(kResonances + 1);
  for (auto& s : slots) {
    s.resize(n_languages);
    for (std::size_t i = 0; i < n_languages; ++i) s[i] = i;
    perm_rng.shuffle(s);
  }

  Rng rng(derive_seed(seed, language + 1, 0));
  LanguageSpec spec{};
  for (std::size_t k = 0; k < kResonances; ++k) {
    const double width = (kBands[k].hi - kBands[k].lo) / static_cast<double>(n_languages);
    const double center = kBands[k].lo + (static_cast<double>(slots[k][language]) + 0.5) * width;
    spec.resonance_hz[k] = center + rng.uniform(-0.2, 0.2) * width;
    spec.bandwidth_hz[k] = rng.uniform(80.0, 220.0);
  }
  const double pitch_width = (kPitchHi - kPitchLo) / static_cast<double>(n_languages);
  const double pitch_center =
      kPitchLo + (static_cast<double>(slots[kResonances][language]) + 0.5) * pitch_width;
  spec.pitch_hz = pitch_center + rng.uniform(-0.2, 0.2) * pitch_width;
  spec.noise_mix = rng.uniform(0.08, 0.18);
  return spec;
}

inline VoiceSpec make_voice(std::uint64_t seed, const LanguageSpec& language,
                            std::size_t language_index, std::size_t speaker_index) {
  Rng rng(derive_seed(seed, language_index + 1, speaker_index + 1));
  auto clipped_gaussian = [&] { return std::clamp(rng.gaussian(), -2.5, 2.5); };
  VoiceSpec v{};
  for (std::size_t k = 0; k < kResonances; ++k) {
    v.resonance_hz[k] = language.resonance_hz[k] * (1.0 + 0.015 * clipped_gaussian());
    v.bandwidth_hz[k] = language.bandwidth_hz[k] * (1.0 + 0.10 * clipped_gaussian());
  }
  v.pitch_hz = language.pitch_hz * (1.0 + 0.04 * clipped_gaussian());
  v.noise_mix = language.noise_mix * (1.0 + 0.10 * clipped_gaussian());
  v.vibrato_hz = rng.uniform(0.2, 0.6);
  v.vibrato_depth = rng.uniform(0.02, 0.05);
  v.syllable_hz = rng.uniform(2.5, 4.0);
  v.phase_a = rng.uniform(0.0, 2.0 * std::numbers::pi);
  v.phase_b = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return v;
}

// AR(8) denominator from four resonance pairs: product of second-order
// sections 1 - 2 r cos(theta) z^-1 + r^2 z^-2.
inline std::vector<double> ar_coefficients(const VoiceSpec& v, int sample_rate) {
  std::vector<double> poly = {1.0};
  for (std::size_t k = 0; k < kResonances; ++k) {
    const double r = std::exp(-std::numbers::pi * v.bandwidth_hz[k] / sample_rate);
    const double theta = 2.0 * std::numbers::pi * v.resonance_hz[k] / sample_rate;
    const double b1 = -2.0 * r * std::cos(theta), b2 = r * r;
    std::vector<double> next(poly.size() + 2, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] += poly[i] * b1;
      next[i + 2] += poly[i] * b2;
    }
    poly = std::move(next);
  }
  return poly;  // poly[0] == 1
}

inline Waveform render_voice(const VoiceSpec& v, double seconds, int sample_rate,
                             std::uint64_t sample_seed) {
  Rng rng(sample_seed);
  const std::size_t n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
  const auto poly = ar_coefficients(v, sample_rate);

  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.assign(n, 0.0);

  const double noise_sigma = v.noise_mix * std::sqrt(v.pitch_hz / sample_rate);
  double phase = 0.0;
  std::vector<double> history(poly.size() - 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double f0 =
        v.pitch_hz * (1.0 + v.vibrato_depth * std::sin(2.0 * std::numbers::pi * v.vibrato_hz * t +
                                                       v.phase_a));
    phase += f0 / sample_rate;
    double excitation = rng.gaussian() * noise_sigma;
    if (phase >= 1.0) {
      phase -= 1.0;
      excitation += 1.0;
    }
    const double syllable =
        0.4 + 0.6 * std::pow(
                        0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * v.syllable_hz * t + v.phase_b),
                        1.5);
    excitation *= syllable;

    double y = excitation;
    for (std::size_t k = 1; k < poly.size(); ++k) y -= poly[k] * history[k - 1];
    for (std::size_t k = history.size(); k-- > 1;) history[k] = history[k - 1];
    history[0] = y;
    w.samples[i] = y;
  }

  double peak = 0.0;
  for (double s : w.samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.0)
    for (double& s : w.samples) s *= 0.95 / peak;
  return w;
}

}  // namespace synth_detail

// Generates the corpus into out_dir: one WAV per (language, speaker) at 16
// kHz/16-bit plus a manifest.csv. Fully deterministic for a fixed seed;
// speakers 1..n-1 train and the last speaker tests.
inline SynthResult synth_corpus(const std::string& out_dir, const SynthOptions& opts = {}) {
  if (opts.n_languages < 2) throw Error("synth_corpus: need at least two languages");
  if (opts.n_speakers < 2) throw Error("synth_corpus: need at least two speakers");
  if (opts.utterance_seconds <= 0.0) throw Error("synth_corpus: seconds must be positive");
  std::filesystem::create_directories(out_dir);

  std::vector<synth_detail::LanguageSpec> languages;
  languages.reserve(opts.n_languages);
  for (std::size_t l = 0; l < opts.n_languages; ++l)
    languages.push_back(synth_detail::make_language(opts.seed, l, opts.n_languages));

  struct Item {
    std::size_t language, speaker;
    std::string file_name;
  };
  std::vector<Item> items;
  for (std::size_t l = 0; l < opts.n_languages; ++l)
    for (std::size_t s = 0; s < opts.n_speakers; ++s) {
      char name[64];
      std::snprintf(name, sizeof name, "L%02zu_s%zu.wav", l + 1, s + 1);
      items.push_back({l, s, name});
    }

  SynthResult result;
  result.wav_paths.resize(items.size());
  parallel_for(items.size(), opts.workers, [&](std::size_t i) {
    const Item& item = items[i];
    const auto voice =
        synth_detail::make_voice(opts.seed, languages[item.language], item.language, item.speaker);
    const auto w = synth_detail::render_voice(
        voice, opts.utterance_seconds, opts.sample_rate,
        derive_seed(opts.seed, 1000 + item.language, 1000 + item.speaker));
    const std::string path = (std::filesystem::path(out_dir) / item.file_name).string();
    write_wav16(path, w);
    result.wav_paths[i] = path;
  });

  const std::string manifest_path = (std::filesystem::path(out_dir) / "manifest.csv").string();
  std::ofstream manifest(manifest_path, std::ios::binary);
  if (!manifest) throw Error("cannot create manifest: " + manifest_path);
  manifest << "language,speaker,path,role\n";
  for (const auto& item : items) {
    char lang[16], spk[16];
    std::snprintf(lang, sizeof lang, "L%02zu", item.language + 1);
    std::snprintf(spk, sizeof spk, "s%zu", item.speaker + 1);
    manifest << lang << ',' << spk << ',' << item.file_name << ','
             << (item.speaker + 1 == opts.n_speakers ? "test" : "train") << '\n';
  }
  if (!manifest) throw Error("failed writing manifest: " + manifest_path);
  result.manifest_path = manifest_path;
  return result;
}

}  // namespace lidkit
