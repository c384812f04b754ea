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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "lidkit/features.hpp"
#include "support.hpp"

using namespace lidkit;
using namespace testsupport;

namespace {

Waveform noise_waveform(std::uint64_t seed, double seconds = 1.0, int rate = 16000) {
  Rng rng(seed);
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<std::size_t>(seconds * rate));
  for (auto& s : w.samples) s = rng.uniform(-0.9, 0.9);
  return w;
}

// A resonant "vowel": pulse train through two strong formant pairs.
Waveform vowel_waveform(std::uint64_t seed, double seconds = 1.0, int rate = 16000) {
  Rng rng(seed);
  Waveform w;
  w.sample_rate = rate;
  const std::size_t n = static_cast<std::size_t>(seconds * rate);
  w.samples.assign(n, 0.0);
  struct Resonator {
    double r, theta, y1 = 0.0, y2 = 0.0;
    double step(double x) {
      double y = x + 2.0 * r * std::cos(theta) * y1 - r * r * y2;
      y2 = y1;
      y1 = y;
      return y;
    }
  };
  Resonator f1{0.98, 2.0 * std::numbers::pi * 700.0 / rate};
  Resonator f2{0.97, 2.0 * std::numbers::pi * 2400.0 / rate};
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    phase += 120.0 / rate;
    double x = 0.002 * rng.gaussian();
    if (phase >= 1.0) {
      phase -= 1.0;
      x += 1.0;
    }
    w.samples[i] = f2.step(f1.step(x));
  }
  double peak = 0.0;
  for (double s : w.samples) peak = std::max(peak, std::abs(s));
  for (double& s : w.samples) s /= peak;
  return w;
}

double mean_abs_tail(const FeatureMatrix& f) {
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < f.vectors.rows(); ++i)
    for (std::size_t j = 1; j < f.vectors.cols(); ++j) {
      acc += std::abs(f.vectors(i, j));
      ++count;
    }
  return acc / static_cast<double>(count);
}

}  // namespace

TEST_CASE("dct_ii of a constant keeps only the DC term") {
  std::vector<double> values(24, 3.5);
  auto c = dct_ii(values, 13);
  REQUIRE(c[0] == Catch::Approx(3.5 * std::sqrt(24.0)).margin(1e-12));
  for (std::size_t j = 1; j < c.size(); ++j) REQUIRE(c[j] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("dct_ii two-point example") {
  std::vector<double> values = {1.0, 0.0};
  auto c = dct_ii(values, 2);
  REQUIRE(c[0] == Catch::Approx(1.0 / std::numbers::sqrt2).margin(1e-12));
  REQUIRE(c[1] == Catch::Approx(std::cos(std::numbers::pi / 4.0)).margin(1e-12));
}

TEST_CASE("dct_ii is orthonormal") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t n = 4 + rng.integer(28);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform(-2.0, 2.0);
    auto c = dct_ii(x, n);
    auto back = inverse_dct(c, n);
    for (std::size_t i = 0; i < n; ++i)
      REQUIRE(back[i] == Catch::Approx(x[i]).margin(1e-10));
    // Truncation is a prefix of the full transform.
    auto head = dct_ii(x, 5);
    for (std::size_t j = 0; j < 5; ++j) REQUIRE(head[j] == c[j]);
  }
}

TEST_CASE("auditory_to_autocorr of a flat spectrum is a delta") {
  std::vector<double> flat(19, 1.0);
  auto r = auditory_to_autocorr(flat, 13);
  REQUIRE(r[0] > 0.0);
  REQUIRE(r[0] == Catch::Approx(1.0).margin(1e-12));
  for (std::size_t tau = 1; tau <= 13; ++tau)
    REQUIRE(r[tau] == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("auditory_to_autocorr matches the mirrored-DFT oracle and stays bounded") {
  Rng rng(22);
  for (int trial = 0; trial < 25; ++trial) {
    std::size_t n = 15 + rng.integer(10);
    std::vector<double> bands(n);
    for (auto& b : bands) b = rng.uniform(0.0, 4.0);
    auto r = auditory_to_autocorr(bands, 13);
    auto oracle = mirrored_dft_autocorr(bands, 13);
    for (std::size_t tau = 0; tau <= 13; ++tau) {
      REQUIRE(r[tau] == Catch::Approx(oracle[tau]).margin(1e-9));
      REQUIRE(r[0] >= std::abs(r[tau]) - 1e-12);
    }
  }
  // Single raised band against the explicit cosine sum.
  std::vector<double> one(19, 0.0);
  one[7] = 2.0;
  auto r = auditory_to_autocorr(one, 13);
  auto oracle = mirrored_dft_autocorr(one, 13);
  for (std::size_t tau = 0; tau <= 13; ++tau)
    REQUIRE(r[tau] == Catch::Approx(oracle[tau]).margin(1e-12));
}

TEST_CASE("levinson_durbin base cases") {
  std::vector<double> white = {1.0, 0.0, 0.0, 0.0};
  auto lp = levinson_durbin(white, 3);
  for (double a : lp.coeffs) REQUIRE(a == 0.0);
  REQUIRE(lp.gain == 1.0);

  std::vector<double> ar1 = {1.0, 0.9, 0.81};
  auto lp1 = levinson_durbin(ar1, 1);
  REQUIRE(lp1.coeffs[0] == Catch::Approx(0.9).margin(1e-15));
  REQUIRE(lp1.gain == Catch::Approx(0.19).margin(1e-15));

  REQUIRE_THROWS_AS(levinson_durbin(std::vector<double>{0.0, 0.0}, 1), SingularAutocorr);
  REQUIRE_THROWS_AS(levinson_durbin(std::vector<double>{1.0, 1.0}, 1), SingularAutocorr);
}

TEST_CASE("levinson_durbin matches the dense normal-equation solve") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t order = 1 + rng.integer(13);
    auto r = random_psd_autocorr(rng, order);
    auto lp = levinson_durbin(r, order);
    auto dense = dense_lp_solve(r, order);
    for (std::size_t j = 0; j < order; ++j)
      REQUIRE(lp.coeffs[j] == Catch::Approx(dense[j]).margin(1e-9));
    REQUIRE(lp.gain == Catch::Approx(dense_lp_gain(r, dense)).margin(1e-9));
    REQUIRE(lp.gain > 0.0);
    for (double k : lp.reflection) REQUIRE(std::abs(k) < 1.0);
  }
}

TEST_CASE("lp gain decreases with order on correlated data") {
  Rng rng(24);
  auto r = random_psd_autocorr(rng, 13);
  double prev = r[0];
  for (std::size_t order = 1; order <= 13; ++order) {
    auto lp = levinson_durbin(r, order);
    REQUIRE(lp.gain <= prev + 1e-12);
    prev = lp.gain;
  }
}

TEST_CASE("lpc_to_cepstra base cases") {
  LpModel flat;
  flat.coeffs.assign(13, 0.0);
  flat.gain = 1.0;
  auto c = lpc_to_cepstra(flat, 13);
  for (double v : c) REQUIRE(v == 0.0);

  LpModel one;
  one.coeffs = {0.5};
  one.gain = 1.0;
  auto c1 = lpc_to_cepstra(one, 4);
  REQUIRE(c1[0] == 0.0);
  REQUIRE(c1[1] == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(c1[2] == Catch::Approx(0.125).margin(1e-15));
  REQUIRE(c1[3] == Catch::Approx(0.5 * 0.5 * 0.5 / 3.0).margin(1e-12));

  LpModel bad;
  bad.coeffs = {0.5};
  bad.gain = 0.0;
  REQUIRE_THROWS_AS(lpc_to_cepstra(bad, 4), NonPositiveGain);
}

TEST_CASE("lpc_to_cepstra matches the FFT log-spectrum cepstrum") {
  Rng rng(25);
  for (int trial = 0; trial < 100; ++trial) {
    auto lp = random_stable_lp(rng, 13);
    auto c = lpc_to_cepstra(lp, 13);
    auto oracle = fft_cepstrum_oracle(lp, 13);
    for (std::size_t n = 0; n < 13; ++n)
      REQUIRE(c[n] == Catch::Approx(oracle[n]).margin(1e-6));
  }
}

TEST_CASE("extract_mfcc on silence yields the log-floor DC cepstrum") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(16000, 0.0);
  auto f = extract_mfcc(w);
  REQUIRE(f.n_frames() == 66);  // floor((16000-400)/240)+1
  const double expected_c0 = std::log(1e-10) * std::sqrt(24.0);
  for (std::size_t i = 0; i < f.n_frames(); ++i) {
    REQUIRE(f.vectors(i, 0) == Catch::Approx(expected_c0).margin(1e-9));
    for (std::size_t j = 1; j < 13; ++j)
      REQUIRE(f.vectors(i, j) == Catch::Approx(0.0).margin(1e-9));
  }
}

TEST_CASE("extract_bfcc on silence zeroes the non-DC cepstra") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(8000, 0.0);
  auto f = extract_bfcc(w);
  for (std::size_t i = 0; i < f.n_frames(); ++i)
    for (std::size_t j = 1; j < 13; ++j)
      REQUIRE(f.vectors(i, j) == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("all four extractors honor the shape and finiteness contract") {
  auto w = noise_waveform(31, 1.0);
  const std::size_t expected_frames = (16000 - 400) / 240 + 1;
  for (FeatureKind kind : all_feature_kinds()) {
    auto f = extract_features(w, kind);
    INFO("kind " << to_string(kind));
    REQUIRE(f.n_frames() == expected_frames);
    REQUIRE(f.dim() == 13);
    for (std::size_t i = 0; i < f.n_frames(); ++i)
      for (std::size_t j = 0; j < 13; ++j) REQUIRE(std::isfinite(f.vectors(i, j)));
  }
}

TEST_CASE("too-short input throws TooShort") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(399, 0.1);
  REQUIRE_THROWS_AS(extract_mfcc(w), TooShort);
  w.samples.clear();
  REQUIRE_THROWS_AS(extract_mfcc(w), EmptySignal);
}

TEST_CASE("LP pipelines are gain-invariant past c0") {
  auto w = noise_waveform(32, 0.5);
  for (FeatureKind kind : {FeatureKind::plp, FeatureKind::rplp}) {
    auto f1 = extract_features(w, kind);
    Waveform scaled = w;
    for (double& s : scaled.samples) s *= 2.0;
    auto f2 = extract_features(scaled, kind);
    INFO("kind " << to_string(kind));
    REQUIRE(f1.n_frames() == f2.n_frames());
    for (std::size_t i = 0; i < f1.n_frames(); ++i) {
      for (std::size_t j = 1; j < 13; ++j)
        REQUIRE(f2.vectors(i, j) == Catch::Approx(f1.vectors(i, j)).margin(1e-6));
      REQUIRE(std::abs(f2.vectors(i, 0) - f1.vectors(i, 0)) > 1e-3);  // gain lands in c0
    }
  }
}

TEST_CASE("DCT pipelines absorb gain into c0 only") {
  auto w = noise_waveform(33, 0.5);
  for (FeatureKind kind : {FeatureKind::mfcc, FeatureKind::bfcc}) {
    auto f1 = extract_features(w, kind);
    Waveform scaled = w;
    for (double& s : scaled.samples) s *= 2.0;
    auto f2 = extract_features(scaled, kind);
    INFO("kind " << to_string(kind));
    for (std::size_t i = 0; i < f1.n_frames(); ++i)
      for (std::size_t j = 1; j < 13; ++j)
        REQUIRE(f2.vectors(i, j) == Catch::Approx(f1.vectors(i, j)).margin(1e-6));
  }
}

TEST_CASE("BFCC reduces to MFCC when the auditory chain is ablated") {
  auto w = noise_waveform(34, 0.5);
  FeatureConfig cfg;
  auto mfcc = extract_mfcc(w, cfg);
  auto bank = build_mel_filterbank(512, w.sample_rate, cfg.n_mel_filters);
  auto ablated = feature_detail::cepstra_via_dct(w, cfg, bank, /*use_loudness=*/false,
                                                 /*use_cube_root=*/false,
                                                 /*use_preemphasis=*/true, FeatureKind::bfcc);
  REQUIRE(ablated.vectors == mfcc.vectors);
}

TEST_CASE("PLP separates white noise from a voiced vowel") {
  auto noise = extract_plp(noise_waveform(35, 0.8));
  auto vowel = extract_plp(vowel_waveform(36, 0.8));
  REQUIRE(mean_abs_tail(noise) < mean_abs_tail(vowel));
}

TEST_CASE("PLP and RPLP agree on the sign of c1 for white noise") {
  auto w = noise_waveform(37, 1.0);
  auto plp = extract_plp(w);
  auto rplp = extract_rplp(w);
  double plp_c1 = 0.0, rplp_c1 = 0.0;
  for (std::size_t i = 0; i < plp.n_frames(); ++i) plp_c1 += plp.vectors(i, 1);
  for (std::size_t i = 0; i < rplp.n_frames(); ++i) rplp_c1 += rplp.vectors(i, 1);
  REQUIRE(plp_c1 * rplp_c1 > 0.0);
}

TEST_CASE("feature CSV export carries the exact header and 17-digit rows") {
  auto w = noise_waveform(38, 0.1);
  auto f = extract_mfcc(w);
  std::ostringstream out;
  write_feature_csv(out, f);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  REQUIRE(header == "# kind=mfcc rate=16000 frame_ms=25 hop_ms=15");
  std::string row;
  std::size_t rows = 0;
  while (std::getline(in, row)) {
    auto fields = lidkit::split(row, ',');
    REQUIRE(fields.size() == 13);
    for (std::size_t j = 0; j < 13; ++j)
      REQUIRE(lidkit::parse_double(fields[j]) == f.vectors(rows, j));
    ++rows;
  }
  REQUIRE(rows == f.n_frames());
}
