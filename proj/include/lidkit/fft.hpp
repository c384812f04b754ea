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

#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "lidkit/common.hpp"

namespace lidkit {

// Iterative radix-2 complex FFT with precomputed twiddles and bit-reversal
// table. Analysis frames are zero-padded to a power of two, so nothing
// fancier is needed.
class Fft {
 public:
  static bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

  explicit Fft(std::size_t n) : n_(n) {
    if (!is_power_of_two(n)) throw BadFftSize("FFT size must be a power of two");
    rev_.resize(n);
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < log2n; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
      rev_[i] = r;
    }
    tw_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      tw_[k] = {std::cos(a), std::sin(a)};
    }
  }

  std::size_t size() const { return n_; }

  void forward(std::vector<std::complex<double>>& x) const {
    if (x.size() != n_) throw BadFftSize("FFT input length does not match plan size");
    for (std::size_t i = 0; i < n_; ++i)
      if (rev_[i] > i) std::swap(x[i], x[rev_[i]]);
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      std::size_t step = n_ / len;
      for (std::size_t block = 0; block < n_; block += len) {
        for (std::size_t j = 0; j < len / 2; ++j) {
          std::complex<double> w = tw_[j * step];
          std::complex<double> u = x[block + j];
          std::complex<double> v = x[block + j + len / 2] * w;
          x[block + j] = u + v;
          x[block + j + len / 2] = u - v;
        }
      }
    }
  }

  void inverse(std::vector<std::complex<double>>& x) const {
    for (auto& v : x) v = std::conj(v);
    forward(x);
    double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : x) v = std::conj(v) * scale;
  }

 private:
  std::size_t n_;
  std::vector<std::size_t> rev_;
  std::vector<std::complex<double>> tw_;
};

}  // namespace lidkit
