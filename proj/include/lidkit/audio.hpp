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
// RIFF/WAVE ingestion, band-limited resampling, and amplitude conditioning.
// Everything downstream works on the canonical Waveform produced here.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "lidkit/common.hpp"

namespace lidkit {

struct Waveform {
  std::vector<double> samples;  // nominal range [-1, 1]
  int sample_rate = 0;          // Hz

  double seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

namespace wav_detail {

inline std::uint32_t read_u32(const std::vector<unsigned char>& b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

inline std::uint16_t read_u16(const std::vector<unsigned char>& b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

inline bool tag_is(const std::vector<unsigned char>& b, std::size_t off, const char* tag) {
  return b[off] == static_cast<unsigned char>(tag[0]) &&
         b[off + 1] == static_cast<unsigned char>(tag[1]) &&
         b[off + 2] == static_cast<unsigned char>(tag[2]) &&
         b[off + 3] == static_cast<unsigned char>(tag[3]);
}

// Modified zeroth-order Bessel function, for the Kaiser window.
inline double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  double half_x = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum;
}

}  // namespace wav_detail

// Reads a PCM WAV file (8/16/24/32-bit integer or 32-bit float, any channel
// count). Integer samples are scaled by the type's full-scale value;
// multichannel audio is averaged down to mono.
inline Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("cannot open WAV file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || !wav_detail::tag_is(bytes, 0, "RIFF") ||
      !wav_detail::tag_is(bytes, 8, "WAVE"))
    throw MalformedWav("not a RIFF/WAVE file: " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t data_off = 0, data_len = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    std::uint32_t chunk_len = wav_detail::read_u32(bytes, pos + 4);
    if (wav_detail::tag_is(bytes, pos, "fmt ")) {
      if (pos + 8 + chunk_len > bytes.size() || chunk_len < 16)
        throw MalformedWav("truncated fmt chunk: " + path);
      format = wav_detail::read_u16(bytes, pos + 8);
      channels = wav_detail::read_u16(bytes, pos + 10);
      rate = wav_detail::read_u32(bytes, pos + 12);
      bits = wav_detail::read_u16(bytes, pos + 22);
      if (format == 0xFFFE) {  // WAVE_FORMAT_EXTENSIBLE: real code leads the GUID
        if (chunk_len < 40) throw MalformedWav("short extensible fmt chunk: " + path);
        format = wav_detail::read_u16(bytes, pos + 8 + 24);
      }
      have_fmt = true;
    } else if (wav_detail::tag_is(bytes, pos, "data")) {
      data_off = pos + 8;
      data_len = chunk_len;
      have_data = true;
      if (data_off + data_len > bytes.size())
        throw MalformedWav("declared data length exceeds file size: " + path);
    }
    pos += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }
  if (!have_fmt || !have_data) throw MalformedWav("missing fmt or data chunk: " + path);
  if (channels == 0 || rate == 0) throw MalformedWav("bad fmt parameters: " + path);
  if (format != 1 && format != 3)
    throw UnsupportedEncoding("compressed or unknown WAV codec (format tag " +
                              std::to_string(format) + "): " + path);
  if (format == 1 && bits != 8 && bits != 16 && bits != 24 && bits != 32)
    throw UnsupportedEncoding("unsupported PCM bit depth " + std::to_string(bits) + ": " + path);
  if (format == 3 && bits != 32)
    throw UnsupportedEncoding("only 32-bit float WAV is supported: " + path);

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_size = bytes_per_sample * channels;
  if (data_len % frame_size != 0) throw MalformedWav("data chunk is not frame-aligned: " + path);
  const std::size_t n_frames = data_len / frame_size;

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  w.samples.resize(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      std::size_t off = data_off + f * frame_size + c * bytes_per_sample;
      double v = 0.0;
      if (format == 3) {
        std::uint32_t u = wav_detail::read_u32(bytes, off);
        float fv;
        std::memcpy(&fv, &u, sizeof fv);
        v = fv;
      } else if (bits == 8) {
        v = (static_cast<int>(bytes[off]) - 128) / 128.0;
      } else if (bits == 16) {
        auto s = static_cast<std::int16_t>(wav_detail::read_u16(bytes, off));
        v = s / 32768.0;
      } else if (bits == 24) {
        std::int32_t s = bytes[off] | (bytes[off + 1] << 8) | (bytes[off + 2] << 16);
        if (s & 0x800000) s |= ~0xFFFFFF;  // sign-extend
        v = s / 8388608.0;
      } else {
        auto s = static_cast<std::int32_t>(wav_detail::read_u32(bytes, off));
        v = s / 2147483648.0;
      }
      acc += v;
    }
    w.samples[f] = acc / channels;
  }
  return w;
}

// Writes mono 16-bit PCM. Used by the synthetic corpus generator and the
// test harness; clamps to full scale before rounding.
inline void write_wav16(const std::string& path, const Waveform& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot create WAV file: " + path);
  auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  auto put_u16 = [&](std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
  };
  const std::uint32_t data_len = static_cast<std::uint32_t>(w.samples.size() * 2);
  out.write("RIFF", 4);
  put_u32(36 + data_len);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(16);
  put_u16(1);  // PCM
  put_u16(1);  // mono
  put_u32(static_cast<std::uint32_t>(w.sample_rate));
  put_u32(static_cast<std::uint32_t>(w.sample_rate) * 2);
  put_u16(2);
  put_u16(16);
  out.write("data", 4);
  put_u32(data_len);
  for (double s : w.samples) {
    double scaled = s * 32768.0;
    long v = std::lround(std::min(32767.0, std::max(-32768.0, scaled)));
    put_u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  if (!out) throw Error("failed writing WAV file: " + path);
}

// Polyphase windowed-sinc resampler: Kaiser window, 64 taps per phase,
// cutoff at 0.9 x the lower Nyquist. Each phase is normalized to unit DC
// gain. Equal input and output rates return the signal unchanged.
inline Waveform resample(const Waveform& w, int target_hz) {
  if (target_hz <= 0) throw Error("resample: target rate must be positive");
  if (w.sample_rate <= 0) throw Error("resample: source rate must be positive");
  if (w.sample_rate == target_hz) return w;

  const std::int64_t g = std::gcd(w.sample_rate, target_hz);
  const std::int64_t up = target_hz / g;      // output samples per block
  const std::int64_t down = w.sample_rate / g;  // input samples per block

  constexpr int kHalfTaps = 32;  // 64 taps per phase
  constexpr double kKaiserBeta = 8.6;
  const double cutoff = 0.9 * std::min(1.0, static_cast<double>(up) / down);

  const double i0_beta = wav_detail::bessel_i0(kKaiserBeta);
  auto kernel = [&](double tau) {
    double x = tau / kHalfTaps;
    if (x <= -1.0 || x >= 1.0) return 0.0;
    double window = wav_detail::bessel_i0(kKaiserBeta * std::sqrt(1.0 - x * x)) / i0_beta;
    double arg = 3.14159265358979323846 * cutoff * tau;
    double sinc = std::abs(arg) < 1e-12 ? 1.0 : std::sin(arg) / arg;
    return cutoff * sinc * window;
  };

  // One tap row per output phase; phase p corresponds to fractional input
  // offset p/up.
  Matrix taps(static_cast<std::size_t>(up), 2 * kHalfTaps);
  for (std::int64_t p = 0; p < up; ++p) {
    double frac = static_cast<double>(p) / up;
    double sum = 0.0;
    for (int j = -kHalfTaps + 1; j <= kHalfTaps; ++j) {
      double v = kernel(frac - j);
      taps(static_cast<std::size_t>(p), static_cast<std::size_t>(j + kHalfTaps - 1)) = v;
      sum += v;
    }
    if (sum != 0.0)
      for (std::size_t k = 0; k < taps.cols(); ++k) taps(static_cast<std::size_t>(p), k) /= sum;
  }

  const std::int64_t n_in = static_cast<std::int64_t>(w.samples.size());
  const std::int64_t n_out = (n_in * up + down / 2) / down;

  Waveform out;
  out.sample_rate = target_hz;
  out.samples.resize(static_cast<std::size_t>(n_out));
  for (std::int64_t m = 0; m < n_out; ++m) {
    std::int64_t num = m * down;
    std::int64_t i0 = num / up;
    std::int64_t phase = num % up;
    auto row = taps.row(static_cast<std::size_t>(phase));
    double acc = 0.0;
    for (int j = -kHalfTaps + 1; j <= kHalfTaps; ++j) {
      std::int64_t idx = i0 + j;
      if (idx < 0 || idx >= n_in) continue;
      acc += w.samples[static_cast<std::size_t>(idx)] *
             row[static_cast<std::size_t>(j + kHalfTaps - 1)];
    }
    out.samples[static_cast<std::size_t>(m)] = acc;
  }
  return out;
}

// Amplitude conditioning: remove the DC mean, then normalize so the peak
// magnitude is exactly 1. A constant (pure DC) signal comes back as zeros.
inline Waveform preprocess(const Waveform& w) {
  if (w.samples.empty()) throw EmptySignal("preprocess: empty signal");
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples = w.samples;
  double input_peak = 0.0;
  for (double s : out.samples) input_peak = std::max(input_peak, std::abs(s));
  double mean = std::accumulate(out.samples.begin(), out.samples.end(), 0.0) /
                static_cast<double>(out.samples.size());
  for (double& s : out.samples) s -= mean;
  double peak = 0.0;
  for (double s : out.samples) peak = std::max(peak, std::abs(s));
  // A pure-DC signal leaves only rounding residue after mean removal; treat
  // it as silence instead of amplifying the residue to full scale.
  if (peak <= 1e-12 * std::max(input_peak, 1e-300)) {
    for (double& s : out.samples) s = 0.0;
  } else {
    for (double& s : out.samples) s /= peak;
  }
  return out;
}

}  // namespace lidkit
