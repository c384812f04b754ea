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
// Short-time analysis shared by every feature pipeline: pre-emphasis,
// framing, windowing, power spectra, Mel and Bark filterbanks, and the
// perceptual weightings used by the auditory-spectrum pipelines.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "lidkit/common.hpp"
#include "lidkit/fft.hpp"

namespace lidkit {

struct FrameSequence {
  Matrix frames;  // n_frames x frame_len
  int frame_len = 0;
  int hop = 0;
  int sample_rate = 0;
};

struct PowerSpectrum {
  std::vector<double> bins;  // |X[k]|^2 for k = 0..nfft/2
  std::size_t nfft = 0;
  int sample_rate = 0;
};

enum class FilterbankKind { mel, bark };

struct Filterbank {
  Matrix weights;                       // n_filters x (nfft/2 + 1)
  std::vector<double> center_freqs_hz;  // one per filter
  FilterbankKind kind = FilterbankKind::mel;
  std::size_t nfft = 0;
  int sample_rate = 0;

  std::size_t n_filters() const { return weights.rows(); }
};

// First-order high-pass 1 - alpha z^-1; the first sample passes through.
inline std::vector<double> preemphasize(std::span<const double> x, double alpha = 0.98) {
  if (alpha < 0.0 || alpha >= 1.0) throw Error("preemphasize: alpha must be in [0, 1)");
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  y[0] = x[0];
  for (std::size_t n = 1; n < x.size(); ++n) y[n] = x[n] - alpha * x[n - 1];
  return y;
}

// Slices the signal into overlapping frames; frame i starts at i * hop and
// the trailing partial frame is discarded.
inline FrameSequence frame_signal(std::span<const double> x, int sample_rate,
                                  double frame_ms = 25.0, double hop_ms = 15.0) {
  if (sample_rate <= 0) throw Error("frame_signal: sample rate must be positive");
  if (!(frame_ms > hop_ms && hop_ms > 0.0))
    throw Error("frame_signal: need frame_ms > hop_ms > 0");
  FrameSequence fs;
  fs.sample_rate = sample_rate;
  fs.frame_len = static_cast<int>(std::lround(frame_ms * sample_rate / 1000.0));
  fs.hop = static_cast<int>(std::lround(hop_ms * sample_rate / 1000.0));
  const std::size_t frame_len = static_cast<std::size_t>(fs.frame_len);
  const std::size_t hop = static_cast<std::size_t>(fs.hop);
  std::size_t n_frames =
      x.size() >= frame_len ? (x.size() - frame_len) / hop + 1 : 0;
  fs.frames = Matrix(n_frames, frame_len);
  for (std::size_t i = 0; i < n_frames; ++i) {
    auto row = fs.frames.row(i);
    for (std::size_t n = 0; n < frame_len; ++n) row[n] = x[i * hop + n];
  }
  return fs;
}

inline std::vector<double> hamming_window(std::size_t n) {
  if (n < 2) throw Error("hamming_window: need at least 2 points");
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
  return w;
}

inline void apply_hamming(std::span<double> frame) {
  if (frame.size() < 2) throw Error("apply_hamming: frame too short");
  auto w = hamming_window(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) frame[i] *= w[i];
}

// |DFT|^2 of the zero-padded frame, bins 0..nfft/2. The plan overload lets
// the extractors reuse one FFT across all frames.
inline PowerSpectrum power_spectrum(std::span<const double> frame, const Fft& fft,
                                    int sample_rate = 0) {
  const std::size_t nfft = fft.size();
  if (nfft < frame.size()) throw BadFftSize("power_spectrum: nfft smaller than frame");
  std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
  for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = {frame[i], 0.0};
  fft.forward(buf);
  PowerSpectrum ps;
  ps.nfft = nfft;
  ps.sample_rate = sample_rate;
  ps.bins.resize(nfft / 2 + 1);
  for (std::size_t k = 0; k <= nfft / 2; ++k) ps.bins[k] = std::norm(buf[k]);
  return ps;
}

inline PowerSpectrum power_spectrum(std::span<const double> frame, std::size_t nfft,
                                    int sample_rate = 0) {
  if (!Fft::is_power_of_two(nfft)) throw BadFftSize("power_spectrum: nfft not a power of two");
  return power_spectrum(frame, Fft(nfft), sample_rate);
}

inline double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }

inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Schroeder's Bark warp; with omega = 2*pi*f it reduces to 6*asinh(f/600).
inline double bark_warp(double f) { return 6.0 * std::asinh(f / 600.0); }

inline double bark_to_hz(double z) { return 600.0 * std::sinh(z / 6.0); }

// Critical-band masking curve as a function of the Bark offset from the
// band center: steep lower skirt, flat 1-Bark top, shallow upper skirt.
inline double critical_band_curve(double offset_bark) {
  if (offset_bark < -1.3 || offset_bark > 2.5) return 0.0;
  if (offset_bark < -0.5) return std::pow(10.0, 2.5 * (offset_bark + 0.5));
  if (offset_bark <= 0.5) return 1.0;
  return std::pow(10.0, -(offset_bark - 0.5));
}

// 24 triangular filters with edges equally spaced on the Mel axis between
// f_lo and f_hi (n_filters + 2 edge points); triangles are linear in Mel
// with peak weight 1 at the center edge.
inline Filterbank build_mel_filterbank(std::size_t nfft, int sample_rate,
                                       std::size_t n_filters = 24, double f_lo = 0.0,
                                       double f_hi = 0.0) {
  if (!Fft::is_power_of_two(nfft)) throw BadFftSize("mel filterbank: nfft not a power of two");
  if (sample_rate <= 0) throw Error("mel filterbank: sample rate must be positive");
  const double nyquist = sample_rate / 2.0;
  if (f_hi <= 0.0) f_hi = nyquist;
  if (!(f_lo >= 0.0 && f_lo < f_hi && f_hi <= nyquist))
    throw Error("mel filterbank: need 0 <= f_lo < f_hi <= Nyquist");
  if (n_filters == 0) throw Error("mel filterbank: need at least one filter");

  const double mel_lo = hz_to_mel(f_lo);
  const double mel_hi = hz_to_mel(f_hi);
  std::vector<double> edges(n_filters + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                            static_cast<double>(n_filters + 1);

  Filterbank fb;
  fb.kind = FilterbankKind::mel;
  fb.nfft = nfft;
  fb.sample_rate = sample_rate;
  fb.weights = Matrix(n_filters, nfft / 2 + 1);
  fb.center_freqs_hz.resize(n_filters);
  for (std::size_t m = 0; m < n_filters; ++m)
    fb.center_freqs_hz[m] = mel_to_hz(edges[m + 1]);

  for (std::size_t k = 0; k <= nfft / 2; ++k) {
    const double f = static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
    const double mel = hz_to_mel(f);
    for (std::size_t m = 0; m < n_filters; ++m) {
      double w = 0.0;
      if (mel >= edges[m] && mel <= edges[m + 1] && edges[m + 1] > edges[m])
        w = (mel - edges[m]) / (edges[m + 1] - edges[m]);
      else if (mel > edges[m + 1] && mel <= edges[m + 2] && edges[m + 2] > edges[m + 1])
        w = (edges[m + 2] - mel) / (edges[m + 2] - edges[m + 1]);
      fb.weights(m, k) = w;
    }
  }

  for (std::size_t m = 0; m < n_filters; ++m) {
    bool any = false;
    for (std::size_t k = 0; k <= nfft / 2; ++k)
      if (fb.weights(m, k) > 0.0) { any = true; break; }
    if (!any)
      throw DegenerateBank("mel filterbank: filter " + std::to_string(m) +
                           " has no support at nfft " + std::to_string(nfft));
  }
  return fb;
}

// Critical-band filters at 1-Bark spacing: centers 0.5, 1.5, ... up to
// bark(Nyquist) - 0.5, each sampled from the masking curve at bin Bark
// values.
inline Filterbank build_bark_filterbank(std::size_t nfft, int sample_rate) {
  if (!Fft::is_power_of_two(nfft)) throw BadFftSize("bark filterbank: nfft not a power of two");
  if (sample_rate <= 0) throw Error("bark filterbank: sample rate must be positive");
  const double bark_nyquist = bark_warp(sample_rate / 2.0);

  std::vector<double> centers;
  for (double c = 0.5; c <= bark_nyquist - 0.5 + 1e-12; c += 1.0) centers.push_back(c);
  if (centers.empty()) throw DegenerateBank("bark filterbank: sample rate too low");

  Filterbank fb;
  fb.kind = FilterbankKind::bark;
  fb.nfft = nfft;
  fb.sample_rate = sample_rate;
  fb.weights = Matrix(centers.size(), nfft / 2 + 1);
  fb.center_freqs_hz.resize(centers.size());
  for (std::size_t m = 0; m < centers.size(); ++m)
    fb.center_freqs_hz[m] = bark_to_hz(centers[m]);

  for (std::size_t k = 0; k <= nfft / 2; ++k) {
    const double f = static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
    const double z = bark_warp(f);
    for (std::size_t m = 0; m < centers.size(); ++m)
      fb.weights(m, k) = critical_band_curve(z - centers[m]);
  }

  for (std::size_t m = 0; m < centers.size(); ++m) {
    bool any = false;
    for (std::size_t k = 0; k <= nfft / 2; ++k)
      if (fb.weights(m, k) > 0.0) { any = true; break; }
    if (!any)
      throw DegenerateBank("bark filterbank: filter " + std::to_string(m) +
                           " has no support at nfft " + std::to_string(nfft));
  }
  return fb;
}

inline std::vector<double> apply_filterbank(const PowerSpectrum& spec, const Filterbank& fb) {
  if (spec.bins.size() != fb.weights.cols())
    throw ShapeMismatch("apply_filterbank: spectrum has " + std::to_string(spec.bins.size()) +
                        " bins, filterbank expects " + std::to_string(fb.weights.cols()));
  std::vector<double> energies(fb.n_filters(), 0.0);
  for (std::size_t m = 0; m < fb.n_filters(); ++m) {
    auto row = fb.weights.row(m);
    double acc = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) acc += row[k] * spec.bins[k];
    energies[m] = acc;
  }
  return energies;
}

// Rational approximation of the ear's equal-loudness sensitivity, evaluated
// at band center frequencies. Zero at DC, positive elsewhere.
inline std::vector<double> equal_loudness_weights(std::span<const double> center_freqs_hz) {
  std::vector<double> weights(center_freqs_hz.size());
  for (std::size_t i = 0; i < center_freqs_hz.size(); ++i) {
    const double w = 2.0 * std::numbers::pi * center_freqs_hz[i];
    const double w2 = w * w;
    weights[i] = ((w2 + 56.8e6) * w2 * w2) /
                 ((w2 + 6.3e6) * (w2 + 6.3e6) * (w2 + 0.38e9));
  }
  return weights;
}

// Cube-root intensity-to-loudness compression.
inline double intensity_to_loudness(double e) { return std::cbrt(e); }

}  // namespace lidkit
