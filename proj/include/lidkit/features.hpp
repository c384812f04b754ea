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
// The four cepstral feature pipelines (MFCC, PLP, BFCC, RPLP) and their
// shared numeric kernels: DCT-II, auditory-spectrum autocorrelation,
// Levinson-Durbin, and the LPC-to-cepstrum recursion.
//
// The two DCT-based pipelines (MFCC, BFCC) and the two LP-based pipelines
// (PLP, RPLP) differ only in the filterbank and perceptual weighting, so
// each pair shares one driver.

#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "lidkit/audio.hpp"
#include "lidkit/common.hpp"
#include "lidkit/fft.hpp"
#include "lidkit/frontend.hpp"

namespace lidkit {

enum class FeatureKind { mfcc, plp, bfcc, rplp };

inline const char* to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::mfcc: return "mfcc";
    case FeatureKind::plp: return "plp";
    case FeatureKind::bfcc: return "bfcc";
    case FeatureKind::rplp: return "rplp";
  }
  return "?";
}

inline FeatureKind feature_kind_from_string(const std::string& s) {
  if (s == "mfcc") return FeatureKind::mfcc;
  if (s == "plp") return FeatureKind::plp;
  if (s == "bfcc") return FeatureKind::bfcc;
  if (s == "rplp") return FeatureKind::rplp;
  throw Error("unknown feature kind: '" + s + "'");
}

inline const std::vector<FeatureKind>& all_feature_kinds() {
  static const std::vector<FeatureKind> kinds = {FeatureKind::mfcc, FeatureKind::bfcc,
                                                 FeatureKind::plp, FeatureKind::rplp};
  return kinds;
}

struct FeatureConfig {
  double frame_ms = 25.0;
  double hop_ms = 15.0;
  double preemphasis = 0.98;
  std::size_t n_mel_filters = 24;
  std::size_t n_ceps = 13;
  std::size_t lp_order = 13;
  std::size_t nfft = 0;  // 0 = smallest power of two >= frame length
  double mel_f_lo = 0.0;
  double mel_f_hi = 0.0;  // 0 = Nyquist
  double log_floor = 1e-10;
};

struct FeatureMatrix {
  Matrix vectors;  // n_frames x n_ceps
  FeatureKind kind = FeatureKind::mfcc;
  int sample_rate = 0;
  int frame_len = 0;
  int hop = 0;

  std::size_t n_frames() const { return vectors.rows(); }
  std::size_t dim() const { return vectors.cols(); }
};

struct LpModel {
  std::vector<double> coeffs;      // a[1..p] for A(z) = 1 - sum a_k z^-k
  std::vector<double> reflection;  // k[1..p]
  double gain = 0.0;               // prediction-error power

  std::size_t order() const { return coeffs.size(); }
};

// Orthonormal DCT-II of `values`, truncated to the first n_out coefficients.
inline std::vector<double> dct_ii(std::span<const double> values, std::size_t n_out) {
  const std::size_t n = values.size();
  if (n_out < 1 || n_out > n) throw Error("dct_ii: need 1 <= n_out <= input length");
  std::vector<double> c(n_out, 0.0);
  const double scale0 = std::sqrt(1.0 / static_cast<double>(n));
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t j = 0; j < n_out; ++j) {
    double acc = 0.0;
    for (std::size_t m = 0; m < n; ++m)
      acc += values[m] * std::cos(std::numbers::pi * static_cast<double>(j) *
                                  (static_cast<double>(m) + 0.5) / static_cast<double>(n));
    c[j] = (j == 0 ? scale0 : scale) * acc;
  }
  return c;
}

// Autocorrelation of the signal whose half-spectrum is the warped band
// sequence: the bands are mirrored into an even sequence of length
// 2(n - 1) and the inverse DFT is evaluated at lags 0..max_lag.
inline std::vector<double> auditory_to_autocorr(std::span<const double> band_values,
                                                std::size_t max_lag) {
  const std::size_t n = band_values.size();
  if (n < 2) throw Error("auditory_to_autocorr: need at least two bands");
  if (max_lag >= n) throw Error("auditory_to_autocorr: max lag must be below band count");
  const std::size_t period = 2 * (n - 1);
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t tau = 0; tau <= max_lag; ++tau) {
    double acc = band_values[0];
    acc += (tau % 2 == 0 ? 1.0 : -1.0) * band_values[n - 1];
    for (std::size_t m = 1; m + 1 < n; ++m)
      acc += 2.0 * band_values[m] *
             std::cos(std::numbers::pi * static_cast<double>(m) * static_cast<double>(tau) /
                      static_cast<double>(n - 1));
    r[tau] = acc / static_cast<double>(period);
  }
  return r;
}

// Levinson-Durbin recursion for the Toeplitz normal equations. Returns the
// predictor coefficients of A(z) = 1 - sum a_k z^-k and the final
// prediction-error power gain = r[0] * prod(1 - k_i^2).
inline LpModel levinson_durbin(std::span<const double> r, std::size_t order) {
  if (r.size() < order + 1) throw Error("levinson_durbin: need r[0..order]");
  if (!(r[0] > 0.0)) throw SingularAutocorr("levinson_durbin: r[0] must be positive");
  LpModel lp;
  lp.coeffs.assign(order, 0.0);
  lp.reflection.assign(order, 0.0);
  double err = r[0];
  std::vector<double> prev(order, 0.0);
  for (std::size_t i = 1; i <= order; ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc -= prev[j - 1] * r[i - j];
    const double k = acc / err;
    if (!(std::abs(k) < 1.0))
      throw SingularAutocorr("levinson_durbin: reflection coefficient out of range at order " +
                             std::to_string(i));
    lp.reflection[i - 1] = k;
    lp.coeffs[i - 1] = k;
    for (std::size_t j = 1; j < i; ++j)
      lp.coeffs[j - 1] = prev[j - 1] - k * prev[i - j - 1];
    err *= 1.0 - k * k;
    prev = lp.coeffs;
  }
  lp.gain = err;
  return lp;
}

// Cepstral recursion for an all-pole model: c[0] = ln(gain),
// c[n] = a_n + sum_{k=1}^{n-1} (k/n) c[k] a_{n-k} (the a term drops past the
// model order).
inline std::vector<double> lpc_to_cepstra(const LpModel& lp, std::size_t n_ceps) {
  if (!(lp.gain > 0.0)) throw NonPositiveGain("lpc_to_cepstra: model gain must be positive");
  if (n_ceps < 1) throw Error("lpc_to_cepstra: need at least one coefficient");
  const std::size_t p = lp.order();
  std::vector<double> c(n_ceps, 0.0);
  c[0] = std::log(lp.gain);
  for (std::size_t n = 1; n < n_ceps; ++n) {
    double acc = n <= p ? lp.coeffs[n - 1] : 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      const std::size_t lag = n - k;
      if (lag >= 1 && lag <= p)
        acc += (static_cast<double>(k) / static_cast<double>(n)) * c[k] * lp.coeffs[lag - 1];
    }
    c[n] = acc;
  }
  return c;
}

namespace feature_detail {

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

struct FrameSpectra {
  FrameSequence frames;
  std::size_t nfft = 0;
};

// Pre-emphasis (optional), framing, and window setup shared by all
// pipelines.
inline FrameSpectra prepare_frames(const Waveform& w, const FeatureConfig& cfg,
                                   bool use_preemphasis) {
  if (w.samples.empty()) throw EmptySignal("feature extraction: empty waveform");
  if (w.sample_rate <= 0) throw Error("feature extraction: sample rate must be positive");
  std::vector<double> x;
  if (use_preemphasis && cfg.preemphasis > 0.0)
    x = preemphasize(w.samples, cfg.preemphasis);
  else
    x.assign(w.samples.begin(), w.samples.end());
  FrameSpectra fsp;
  fsp.frames = frame_signal(x, w.sample_rate, cfg.frame_ms, cfg.hop_ms);
  if (fsp.frames.frames.rows() == 0)
    throw TooShort("feature extraction: signal shorter than one frame");
  fsp.nfft = cfg.nfft != 0 ? cfg.nfft
                           : next_power_of_two(static_cast<std::size_t>(fsp.frames.frame_len));
  if (!Fft::is_power_of_two(fsp.nfft) ||
      fsp.nfft < static_cast<std::size_t>(fsp.frames.frame_len))
    throw BadFftSize("feature extraction: bad nfft");
  return fsp;
}

// Filterbank -> (optional equal-loudness, cube root) -> log -> DCT.
// MFCC uses the Mel bank with no perceptual weighting; BFCC uses the Bark
// bank with the full auditory chain.
inline FeatureMatrix cepstra_via_dct(const Waveform& w, const FeatureConfig& cfg,
                                     const Filterbank& bank, bool use_loudness,
                                     bool use_cube_root, bool use_preemphasis,
                                     FeatureKind kind) {
  FrameSpectra fsp = prepare_frames(w, cfg, use_preemphasis);
  const Fft fft(fsp.nfft);
  const auto window = hamming_window(static_cast<std::size_t>(fsp.frames.frame_len));
  const auto loudness = equal_loudness_weights(bank.center_freqs_hz);

  FeatureMatrix out;
  out.kind = kind;
  out.sample_rate = w.sample_rate;
  out.frame_len = fsp.frames.frame_len;
  out.hop = fsp.frames.hop;
  out.vectors = Matrix(fsp.frames.frames.rows(), cfg.n_ceps);

  std::vector<double> buf(window.size());
  for (std::size_t i = 0; i < fsp.frames.frames.rows(); ++i) {
    auto frame = fsp.frames.frames.row(i);
    for (std::size_t n = 0; n < buf.size(); ++n) buf[n] = frame[n] * window[n];
    auto spec = power_spectrum(buf, fft, w.sample_rate);
    auto bands = apply_filterbank(spec, bank);
    for (std::size_t m = 0; m < bands.size(); ++m) {
      double v = bands[m];
      if (use_loudness) v *= loudness[m];
      if (use_cube_root) v = intensity_to_loudness(v);
      bands[m] = std::log(std::max(v, cfg.log_floor));
    }
    auto ceps = dct_ii(bands, cfg.n_ceps);
    auto row = out.vectors.row(i);
    for (std::size_t j = 0; j < ceps.size(); ++j) row[j] = ceps[j];
  }
  return out;
}

// Filterbank -> (optional auditory chain) -> autocorrelation -> LP ->
// cepstral recursion. PLP uses the Bark bank with loudness weighting and
// cube-root compression; RPLP feeds the Mel bank straight into the LP
// analysis.
inline FeatureMatrix cepstra_via_lp(const Waveform& w, const FeatureConfig& cfg,
                                    const Filterbank& bank, bool use_loudness,
                                    bool use_cube_root, bool use_preemphasis,
                                    FeatureKind kind) {
  FrameSpectra fsp = prepare_frames(w, cfg, use_preemphasis);
  const Fft fft(fsp.nfft);
  const auto window = hamming_window(static_cast<std::size_t>(fsp.frames.frame_len));
  const auto loudness = equal_loudness_weights(bank.center_freqs_hz);
  if (cfg.lp_order >= bank.n_filters())
    throw Error("feature extraction: LP order must be below the band count");

  FeatureMatrix out;
  out.kind = kind;
  out.sample_rate = w.sample_rate;
  out.frame_len = fsp.frames.frame_len;
  out.hop = fsp.frames.hop;
  out.vectors = Matrix(fsp.frames.frames.rows(), cfg.n_ceps);

  std::vector<double> buf(window.size());
  for (std::size_t i = 0; i < fsp.frames.frames.rows(); ++i) {
    auto frame = fsp.frames.frames.row(i);
    for (std::size_t n = 0; n < buf.size(); ++n) buf[n] = frame[n] * window[n];
    auto spec = power_spectrum(buf, fft, w.sample_rate);
    auto bands = apply_filterbank(spec, bank);
    for (std::size_t m = 0; m < bands.size(); ++m) {
      if (use_loudness) bands[m] *= loudness[m];
      if (use_cube_root) bands[m] = intensity_to_loudness(bands[m]);
    }
    auto r = auditory_to_autocorr(bands, cfg.lp_order);
    auto lp = levinson_durbin(r, cfg.lp_order);
    auto ceps = lpc_to_cepstra(lp, cfg.n_ceps);
    auto row = out.vectors.row(i);
    for (std::size_t j = 0; j < ceps.size(); ++j) row[j] = ceps[j];
  }
  return out;
}

}  // namespace feature_detail

inline FeatureMatrix extract_mfcc(const Waveform& w, const FeatureConfig& cfg = {}) {
  std::size_t frame_len = static_cast<std::size_t>(
      std::lround(cfg.frame_ms * w.sample_rate / 1000.0));
  std::size_t nfft =
      cfg.nfft != 0 ? cfg.nfft : feature_detail::next_power_of_two(frame_len);
  auto bank = build_mel_filterbank(nfft, w.sample_rate, cfg.n_mel_filters, cfg.mel_f_lo,
                                   cfg.mel_f_hi);
  return feature_detail::cepstra_via_dct(w, cfg, bank, /*use_loudness=*/false,
                                         /*use_cube_root=*/false, /*use_preemphasis=*/true,
                                         FeatureKind::mfcc);
}

inline FeatureMatrix extract_bfcc(const Waveform& w, const FeatureConfig& cfg = {}) {
  std::size_t frame_len = static_cast<std::size_t>(
      std::lround(cfg.frame_ms * w.sample_rate / 1000.0));
  std::size_t nfft =
      cfg.nfft != 0 ? cfg.nfft : feature_detail::next_power_of_two(frame_len);
  auto bank = build_bark_filterbank(nfft, w.sample_rate);
  return feature_detail::cepstra_via_dct(w, cfg, bank, /*use_loudness=*/true,
                                         /*use_cube_root=*/true, /*use_preemphasis=*/true,
                                         FeatureKind::bfcc);
}

inline FeatureMatrix extract_plp(const Waveform& w, const FeatureConfig& cfg = {}) {
  std::size_t frame_len = static_cast<std::size_t>(
      std::lround(cfg.frame_ms * w.sample_rate / 1000.0));
  std::size_t nfft =
      cfg.nfft != 0 ? cfg.nfft : feature_detail::next_power_of_two(frame_len);
  auto bank = build_bark_filterbank(nfft, w.sample_rate);
  // No pre-emphasis filter: the equal-loudness weighting plays that role.
  return feature_detail::cepstra_via_lp(w, cfg, bank, /*use_loudness=*/true,
                                        /*use_cube_root=*/true, /*use_preemphasis=*/false,
                                        FeatureKind::plp);
}

inline FeatureMatrix extract_rplp(const Waveform& w, const FeatureConfig& cfg = {}) {
  std::size_t frame_len = static_cast<std::size_t>(
      std::lround(cfg.frame_ms * w.sample_rate / 1000.0));
  std::size_t nfft =
      cfg.nfft != 0 ? cfg.nfft : feature_detail::next_power_of_two(frame_len);
  auto bank = build_mel_filterbank(nfft, w.sample_rate, cfg.n_mel_filters, cfg.mel_f_lo,
                                   cfg.mel_f_hi);
  return feature_detail::cepstra_via_lp(w, cfg, bank, /*use_loudness=*/false,
                                        /*use_cube_root=*/false, /*use_preemphasis=*/true,
                                        FeatureKind::rplp);
}

inline FeatureMatrix extract_features(const Waveform& w, FeatureKind kind,
                                      const FeatureConfig& cfg = {}) {
  switch (kind) {
    case FeatureKind::mfcc: return extract_mfcc(w, cfg);
    case FeatureKind::plp: return extract_plp(w, cfg);
    case FeatureKind::bfcc: return extract_bfcc(w, cfg);
    case FeatureKind::rplp: return extract_rplp(w, cfg);
  }
  throw Error("extract_features: unknown kind");
}

// CSV export: one row per frame, 17 significant digits, with a metadata
// header line.
inline void write_feature_csv(std::ostream& out, const FeatureMatrix& f) {
  const double frame_ms = 1000.0 * f.frame_len / f.sample_rate;
  const double hop_ms = 1000.0 * f.hop / f.sample_rate;
  char header[128];
  std::snprintf(header, sizeof header, "# kind=%s rate=%d frame_ms=%g hop_ms=%g",
                to_string(f.kind), f.sample_rate, frame_ms, hop_ms);
  out << header << '\n';
  for (std::size_t i = 0; i < f.vectors.rows(); ++i) {
    auto row = f.vectors.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << format_g17(row[j]);
    }
    out << '\n';
  }
}

inline void write_feature_csv(const std::string& path, const FeatureMatrix& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot create feature CSV: " + path);
  write_feature_csv(out, f);
  if (!out) throw Error("failed writing feature CSV: " + path);
}

}  // namespace lidkit
