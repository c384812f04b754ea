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
// Phase-one classifier: binary-split LBG codebooks as utterance and
// language signatures, compared by dynamic time warping over the ordered
// centroid sequences.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lidkit/common.hpp"
#include "lidkit/features.hpp"

namespace lidkit {

struct Codebook {
  Matrix centroids;  // K x dim, sorted lexicographically by coefficient
  double distortion = 0.0;
  std::vector<double> distortion_history;  // one entry per Lloyd iteration
  std::string ordering = "lex";

  std::size_t size() const { return centroids.rows(); }
  std::size_t dim() const { return centroids.cols(); }
};

struct LbgOptions {
  double split_eps = 0.01;
  double rel_tol = 1e-4;  // stop when the relative distortion drop falls below this
  std::size_t max_lloyd_iters = 200;
};

namespace vq_detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

// Nearest centroid per row; ties go to the lower index.
inline void assign_cells(const Matrix& x, const Matrix& centroids,
                         std::vector<std::size_t>& cell, std::vector<double>& dist) {
  cell.resize(x.rows());
  dist.resize(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
      const double d = squared_distance(x.row(i), centroids.row(c));
      if (d < best) {
        best = d;
        best_c = c;
      }
    }
    cell[i] = best_c;
    dist[i] = best;
  }
}

inline std::size_t count_distinct_rows(const Matrix& x) {
  std::vector<std::vector<double>> rows;
  rows.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    rows.emplace_back(r.begin(), r.end());
  }
  std::sort(rows.begin(), rows.end());
  return static_cast<std::size_t>(std::unique(rows.begin(), rows.end()) - rows.begin());
}

}  // namespace vq_detail

// Binary-split LBG: start from the global mean, split every centroid into
// (1 +/- eps) copies, and Lloyd-iterate to convergence at each size.
// Distortion (mean squared quantization error) is recorded after every
// update and never increases. Centroids come back lexicographically sorted
// so the signature is independent of the input order.
inline Codebook lbg_train(const Matrix& features, std::size_t K, const LbgOptions& opts = {}) {
  if (K == 0 || (K & (K - 1)) != 0) throw Error("lbg_train: K must be a power of two");
  if (features.rows() == 0) throw InsufficientData("lbg_train: no feature vectors");
  if (vq_detail::count_distinct_rows(features) < K)
    throw InsufficientData("lbg_train: fewer than K distinct vectors");
  const std::size_t dim = features.cols();

  Codebook cb;
  Matrix centroids(1, dim, 0.0);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    auto row = features.row(i);
    for (std::size_t j = 0; j < dim; ++j) centroids(0, j) += row[j];
  }
  for (std::size_t j = 0; j < dim; ++j)
    centroids(0, j) /= static_cast<double>(features.rows());

  std::vector<std::size_t> cell;
  std::vector<double> dist;

  auto lloyd = [&](Matrix& c) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t iter = 0; iter < opts.max_lloyd_iters; ++iter) {
      vq_detail::assign_cells(features, c, cell, dist);

      // Re-seed empty cells from the most populous cell's farthest member.
      for (std::size_t attempt = 0; attempt < c.rows(); ++attempt) {
        std::vector<std::size_t> count(c.rows(), 0);
        for (std::size_t i = 0; i < features.rows(); ++i) ++count[cell[i]];
        std::size_t empty = c.rows();
        for (std::size_t k = 0; k < c.rows(); ++k)
          if (count[k] == 0) { empty = k; break; }
        if (empty == c.rows()) break;
        std::size_t big = static_cast<std::size_t>(
            std::max_element(count.begin(), count.end()) - count.begin());
        std::size_t far_i = features.rows();
        double far_d = -1.0;
        for (std::size_t i = 0; i < features.rows(); ++i)
          if (cell[i] == big && dist[i] > far_d) {
            far_d = dist[i];
            far_i = i;
          }
        if (far_i == features.rows()) break;
        auto member = features.row(far_i);
        for (std::size_t j = 0; j < dim; ++j) c(empty, j) = member[j];
        vq_detail::assign_cells(features, c, cell, dist);
      }

      // Update step: each centroid moves to its cell mean.
      Matrix sums(c.rows(), dim, 0.0);
      std::vector<std::size_t> count(c.rows(), 0);
      for (std::size_t i = 0; i < features.rows(); ++i) {
        auto row = features.row(i);
        for (std::size_t j = 0; j < dim; ++j) sums(cell[i], j) += row[j];
        ++count[cell[i]];
      }
      for (std::size_t k = 0; k < c.rows(); ++k)
        if (count[k] > 0)
          for (std::size_t j = 0; j < dim; ++j)
            c(k, j) = sums(k, j) / static_cast<double>(count[k]);

      vq_detail::assign_cells(features, c, cell, dist);
      double d = 0.0;
      for (double v : dist) d += v;
      d /= static_cast<double>(features.rows());
      cb.distortion_history.push_back(d);
      if (std::isfinite(prev) && prev - d <= opts.rel_tol * std::max(prev, 1e-300)) break;
      prev = d;
    }
  };

  lloyd(centroids);
  while (centroids.rows() < K) {
    Matrix split(centroids.rows() * 2, dim);
    for (std::size_t k = 0; k < centroids.rows(); ++k)
      for (std::size_t j = 0; j < dim; ++j) {
        split(2 * k, j) = centroids(k, j) * (1.0 + opts.split_eps);
        split(2 * k + 1, j) = centroids(k, j) * (1.0 - opts.split_eps);
      }
    centroids = std::move(split);
    lloyd(centroids);
  }

  // Lexicographic centroid order makes the signature deterministic.
  std::vector<std::vector<double>> rows;
  rows.reserve(centroids.rows());
  for (std::size_t k = 0; k < centroids.rows(); ++k) {
    auto r = centroids.row(k);
    rows.emplace_back(r.begin(), r.end());
  }
  std::sort(rows.begin(), rows.end());
  cb.centroids = Matrix(rows.size(), dim);
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t j = 0; j < dim; ++j) cb.centroids(k, j) = rows[k][j];
  cb.distortion = cb.distortion_history.back();
  return cb;
}

// Maps each frame to its nearest centroid (squared Euclidean, lower index
// wins ties) and reports the average quantization error.
inline std::pair<std::vector<std::size_t>, double> quantize(const Matrix& features,
                                                            const Codebook& cb) {
  if (features.cols() != cb.dim())
    throw ShapeMismatch("quantize: feature dimension does not match codebook");
  if (features.rows() == 0) return {{}, 0.0};
  std::vector<std::size_t> cell;
  std::vector<double> dist;
  vq_detail::assign_cells(features, cb.centroids, cell, dist);
  double avg = 0.0;
  for (double d : dist) avg += d;
  avg /= static_cast<double>(features.rows());
  return {std::move(cell), avg};
}

// Dynamic time warping with steps {(1,0),(0,1),(1,1)}, anchored endpoints,
// Euclidean local distance, and the cumulative cost divided by the number
// of cells on the optimal path (shortest such path on cost ties, which
// keeps the measure symmetric).
inline double dtw_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() == 0 || b.rows() == 0) throw EmptySequence("dtw_distance: empty sequence");
  if (a.cols() != b.cols()) throw ShapeMismatch("dtw_distance: dimension mismatch");
  const std::size_t n = a.rows(), m = b.rows();
  std::vector<double> cost_prev(m), cost_cur(m);
  std::vector<std::size_t> len_prev(m), len_cur(m);

  auto local = [&](std::size_t i, std::size_t j) {
    return std::sqrt(vq_detail::squared_distance(a.row(i), b.row(j)));
  };

  for (std::size_t j = 0; j < m; ++j) {
    const double d = local(0, j);
    cost_prev[j] = j == 0 ? d : cost_prev[j - 1] + d;
    len_prev[j] = j + 1;
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = local(i, j);
      double best_cost;
      std::size_t best_len;
      if (j == 0) {
        best_cost = cost_prev[0];
        best_len = len_prev[0];
      } else {
        best_cost = cost_prev[j - 1];  // diagonal
        best_len = len_prev[j - 1];
        if (cost_prev[j] < best_cost ||
            (cost_prev[j] == best_cost && len_prev[j] < best_len)) {
          best_cost = cost_prev[j];
          best_len = len_prev[j];
        }
        if (cost_cur[j - 1] < best_cost ||
            (cost_cur[j - 1] == best_cost && len_cur[j - 1] < best_len)) {
          best_cost = cost_cur[j - 1];
          best_len = len_cur[j - 1];
        }
      }
      cost_cur[j] = best_cost + d;
      len_cur[j] = best_len + 1;
    }
    std::swap(cost_prev, cost_cur);
    std::swap(len_prev, len_cur);
  }
  return cost_prev[m - 1] / static_cast<double>(len_prev[m - 1]);
}

// Summarizes the test utterance into its own codebook and ranks languages
// by DTW cost between centroid signatures (ascending; name order breaks
// ties).
inline std::vector<std::pair<std::string, double>> classify_vq_dtw(
    const FeatureMatrix& test, const std::map<std::string, Codebook>& language_books,
    std::size_t utterance_codebook_size, const LbgOptions& opts = {}) {
  if (language_books.empty()) throw Error("classify_vq_dtw: no language codebooks");
  Codebook test_book = lbg_train(test.vectors, utterance_codebook_size, opts);
  std::vector<std::pair<std::string, double>> ranking;
  ranking.reserve(language_books.size());
  for (const auto& [name, book] : language_books)
    ranking.emplace_back(name, dtw_distance(test_book.centroids, book.centroids));
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const auto& x, const auto& y) { return x.second < y.second; });
  return ranking;
}

}  // namespace lidkit
