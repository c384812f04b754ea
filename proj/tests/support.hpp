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
// Shared test helpers and independent oracles. Everything here recomputes
// expected values by a different route than the library code under test
// (dense solves, brute-force scans, direct DFT sums).

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lidkit/common.hpp"
#include "lidkit/features.hpp"
#include "lidkit/fft.hpp"

namespace testsupport {

inline std::string make_temp_dir(const std::string& prefix) {
  static std::atomic<unsigned> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  auto dir = std::filesystem::temp_directory_path() /
             (prefix + "_" + std::to_string(stamp) + "_" + std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(dir);
  return dir.string();
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline std::vector<double> make_sine(double freq_hz, double seconds, int rate,
                                     double amplitude = 0.5) {
  std::vector<double> x(static_cast<std::size_t>(seconds * rate));
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * i / rate);
  return x;
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  double sa = 0, sb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sa += a[i] / n;
    sb += b[i] / n;
  }
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (a[i] - sa) * (b[i] - sb);
    da += (a[i] - sa) * (a[i] - sa);
    db += (b[i] - sb) * (b[i] - sb);
  }
  return num / std::sqrt(da * db);
}

// ---------------------------------------------------------------------------
// WAV construction for reader tests.

inline void append_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void append_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

// Minimal RIFF/WAVE writer with an optional lie in the declared data size.
inline std::string build_wav_bytes(std::uint16_t format, std::uint16_t channels,
                                   std::uint32_t rate, std::uint16_t bits,
                                   const std::string& data,
                                   std::optional<std::uint32_t> declared_data_len = {}) {
  const std::uint32_t data_len =
      declared_data_len ? *declared_data_len : static_cast<std::uint32_t>(data.size());
  std::string s;
  s += "RIFF";
  append_u32(s, 36 + data_len);
  s += "WAVE";
  s += "fmt ";
  append_u32(s, 16);
  append_u16(s, format);
  append_u16(s, channels);
  append_u32(s, rate);
  append_u32(s, rate * channels * bits / 8);
  append_u16(s, static_cast<std::uint16_t>(channels * bits / 8));
  append_u16(s, bits);
  s += "data";
  append_u32(s, data_len);
  s += data;
  return s;
}

inline std::string write_file(const std::string& dir, const std::string& name,
                              const std::string& bytes) {
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  out << bytes;
  return path;
}

// ---------------------------------------------------------------------------
// Oracles.

// Dense Gaussian elimination with partial pivoting; reference for the
// Levinson-Durbin recursion (Toeplitz normal equations R a = r).
inline std::vector<double> solve_dense(std::vector<std::vector<double>> A,
                                       std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
    std::swap(A[col], A[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = A[r][col] / A[col][col];
      for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double acc = b[r];
    for (std::size_t c = r + 1; c < n; ++c) acc -= A[r][c] * x[c];
    x[r] = acc / A[r][r];
  }
  return x;
}

inline std::vector<double> dense_lp_solve(const std::vector<double>& r, std::size_t order) {
  std::vector<std::vector<double>> A(order, std::vector<double>(order));
  std::vector<double> b(order);
  for (std::size_t i = 0; i < order; ++i) {
    b[i] = r[i + 1];
    for (std::size_t j = 0; j < order; ++j)
      A[i][j] = r[static_cast<std::size_t>(std::abs(static_cast<long>(i) - static_cast<long>(j)))];
  }
  return solve_dense(std::move(A), std::move(b));
}

inline double dense_lp_gain(const std::vector<double>& r, const std::vector<double>& a) {
  double g = r[0];
  for (std::size_t j = 0; j < a.size(); ++j) g -= a[j] * r[j + 1];
  return g;
}

// Positive-definite autocorrelation from a strictly positive random power
// spectrum (inverse DFT of a positive even spectrum).
inline std::vector<double> random_psd_autocorr(lidkit::Rng& rng, std::size_t order,
                                               std::size_t n_grid = 128) {
  std::vector<double> spectrum(n_grid);
  for (auto& v : spectrum) v = rng.uniform(0.05, 2.0);
  std::vector<double> r(order + 1, 0.0);
  for (std::size_t tau = 0; tau <= order; ++tau) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n_grid; ++k)
      acc += spectrum[k] *
             std::cos(2.0 * std::numbers::pi * static_cast<double>(k * tau) / n_grid);
    r[tau] = acc / static_cast<double>(n_grid);
  }
  return r;
}

// Random stable all-pole model: conjugate pole pairs with radius <= 0.9.
inline lidkit::LpModel random_stable_lp(lidkit::Rng& rng, std::size_t order) {
  std::vector<double> poly = {1.0};
  std::size_t remaining = order;
  while (remaining >= 2) {
    const double radius = rng.uniform(0.2, 0.9);
    const double angle = rng.uniform(0.1, std::numbers::pi - 0.1);
    const double b1 = -2.0 * radius * std::cos(angle), b2 = radius * radius;
    std::vector<double> next(poly.size() + 2, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] += poly[i] * b1;
      next[i + 2] += poly[i] * b2;
    }
    poly = std::move(next);
    remaining -= 2;
  }
  if (remaining == 1) {
    const double pole = rng.uniform(-0.85, 0.85);
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= poly[i] * pole;
    }
    poly = std::move(next);
  }
  lidkit::LpModel lp;
  lp.coeffs.resize(order);
  for (std::size_t k = 1; k <= order; ++k) lp.coeffs[k - 1] = -poly[k];
  lp.gain = std::exp(rng.uniform(-2.0, 2.0));
  return lp;
}

// FFT route for the all-pole cepstrum: inverse transform of the log model
// power spectrum gain / |A|^2, evaluated on a long grid.
inline std::vector<double> fft_cepstrum_oracle(const lidkit::LpModel& lp, std::size_t n_ceps,
                                               std::size_t n_grid = 4096) {
  std::vector<std::complex<double>> buf(n_grid);
  for (std::size_t k = 0; k < n_grid; ++k) {
    const double w = 2.0 * std::numbers::pi * static_cast<double>(k) / n_grid;
    std::complex<double> a(1.0, 0.0);
    for (std::size_t j = 1; j <= lp.order(); ++j)
      a -= lp.coeffs[j - 1] * std::polar(1.0, -w * static_cast<double>(j));
    buf[k] = std::log(lp.gain / std::norm(a));
  }
  lidkit::Fft fft(n_grid);
  fft.inverse(buf);
  std::vector<double> c(n_ceps);
  for (std::size_t n = 0; n < n_ceps; ++n) c[n] = buf[n].real();
  return c;
}

// Orthonormal inverse DCT (DCT-III), reference for dct_ii round trips.
inline std::vector<double> inverse_dct(const std::vector<double>& c, std::size_t n) {
  std::vector<double> x(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    double acc = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
      const double scale = j == 0 ? std::sqrt(1.0 / static_cast<double>(n))
                                  : std::sqrt(2.0 / static_cast<double>(n));
      acc += scale * c[j] *
             std::cos(std::numbers::pi * static_cast<double>(j) *
                      (static_cast<double>(m) + 0.5) / static_cast<double>(n));
    }
    x[m] = acc;
  }
  return x;
}

// Direct mirrored-DFT reference for auditory_to_autocorr.
inline std::vector<double> mirrored_dft_autocorr(const std::vector<double>& bands,
                                                 std::size_t max_lag) {
  const std::size_t n = bands.size();
  const std::size_t period = 2 * (n - 1);
  std::vector<double> mirrored(period);
  for (std::size_t k = 0; k < n; ++k) mirrored[k] = bands[k];
  for (std::size_t k = n; k < period; ++k) mirrored[k] = bands[period - k];
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t tau = 0; tau <= max_lag; ++tau) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t k = 0; k < period; ++k)
      acc += mirrored[k] * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) *
                                               static_cast<double>(tau) / period);
    r[tau] = acc.real() / static_cast<double>(period);
  }
  return r;
}

inline lidkit::Matrix random_matrix(lidkit::Rng& rng, std::size_t rows, std::size_t cols,
                                    double lo = -1.0, double hi = 1.0) {
  lidkit::Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

}  // namespace testsupport
