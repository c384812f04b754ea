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
// Phase-two classifier: diagonal-covariance Gaussian mixtures fitted by EM
// (LBG-initialized, variance-floored) and scored by average log-likelihood.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "lidkit/common.hpp"
#include "lidkit/vq_dtw.hpp"

namespace lidkit {

struct GmmModel {
  std::vector<double> weights;  // M, positive, sums to 1
  Matrix means;                 // M x dim
  Matrix variances;             // M x dim, diagonal, floored
  std::string language;
  std::vector<double> loglik_history;  // per-frame average, one entry per EM iteration

  std::size_t components() const { return weights.size(); }
  std::size_t dim() const { return means.cols(); }
};

struct EmOptions {
  std::size_t max_iters = 100;
  double tol = 1e-5;  // per-frame log-likelihood gain below this stops
  std::uint64_t seed = 0;
  double var_floor = 1e-4;
};

namespace gmm_detail {

// Per-frame responsibilities and the average log-likelihood, computed with
// max-shifted exponent sums so distant frames stay finite.
inline std::pair<Matrix, double> e_step(const GmmModel& g, const Matrix& x) {
  const std::size_t T = x.rows(), M = g.components(), dim = g.dim();
  Matrix resp(T, M);
  std::vector<double> log_norm(M);
  for (std::size_t m = 0; m < M; ++m) {
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d)
      acc += std::log(2.0 * std::numbers::pi * g.variances(m, d));
    log_norm[m] = std::log(g.weights[m]) - 0.5 * acc;
  }
  double total = 0.0;
  std::vector<double> lp(M);
  for (std::size_t t = 0; t < T; ++t) {
    auto frame = x.row(t);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < M; ++m) {
      double q = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = frame[d] - g.means(m, d);
        q += diff * diff / g.variances(m, d);
      }
      lp[m] = log_norm[m] - 0.5 * q;
      mx = std::max(mx, lp[m]);
    }
    double sum = 0.0;
    for (std::size_t m = 0; m < M; ++m) sum += std::exp(lp[m] - mx);
    const double lse = mx + std::log(sum);
    for (std::size_t m = 0; m < M; ++m) resp(t, m) = std::exp(lp[m] - mx) / sum;
    total += lse;
  }
  return {std::move(resp), total / static_cast<double>(T)};
}

}  // namespace gmm_detail

// Fits an M-component diagonal GMM by EM. Initialization comes from an LBG
// codebook (M rounded up to a power of two, the M most populous clusters
// kept), which makes the whole fit deterministic for fixed input.
inline GmmModel em_fit(const Matrix& features, std::size_t M, const EmOptions& opts = {}) {
  const std::size_t T = features.rows(), dim = features.cols();
  if (M < 1) throw Error("em_fit: need at least one component");
  if (T < 10 * M)
    throw InsufficientData("em_fit: need at least 10 frames per component (" +
                           std::to_string(T) + " frames for M=" + std::to_string(M) + ")");

  std::size_t K = 1;
  while (K < M) K <<= 1;
  Codebook cb = lbg_train(features, K);
  auto [cells, avg_dist] = quantize(features, cb);
  (void)avg_dist;

  std::vector<std::size_t> count(K, 0);
  for (std::size_t c : cells) ++count[c];
  std::vector<std::size_t> order(K);
  for (std::size_t k = 0; k < K; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return count[a] > count[b]; });
  order.resize(M);
  std::sort(order.begin(), order.end());  // keep codebook order among survivors

  GmmModel g;
  g.weights.assign(M, 0.0);
  g.means = Matrix(M, dim);
  g.variances = Matrix(M, dim, opts.var_floor);
  std::size_t kept_total = 0;
  for (std::size_t m = 0; m < M; ++m) kept_total += count[order[m]];
  if (kept_total == 0) throw InsufficientData("em_fit: empty initialization clusters");
  for (std::size_t m = 0; m < M; ++m) {
    const std::size_t k = order[m];
    g.weights[m] = static_cast<double>(count[k]) / static_cast<double>(kept_total);
    for (std::size_t d = 0; d < dim; ++d) g.means(m, d) = cb.centroids(k, d);
  }
  // Per-cluster diagonal variances around the centroid, floored.
  {
    Matrix acc(K, dim, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      auto frame = features.row(t);
      const std::size_t k = cells[t];
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = frame[d] - cb.centroids(k, d);
        acc(k, d) += diff * diff;
      }
    }
    for (std::size_t m = 0; m < M; ++m) {
      const std::size_t k = order[m];
      for (std::size_t d = 0; d < dim; ++d)
        g.variances(m, d) =
            count[k] > 0 ? std::max(acc(k, d) / static_cast<double>(count[k]), opts.var_floor)
                         : opts.var_floor;
    }
  }
  // Guard against zero-weight survivors (possible only after trimming).
  {
    double wsum = 0.0;
    for (double& w : g.weights) {
      w = std::max(w, 1e-6);
      wsum += w;
    }
    for (double& w : g.weights) w /= wsum;
  }

  bool reseeded = false;
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < opts.max_iters; ++iter) {
    auto [resp, ll] = gmm_detail::e_step(g, features);
    g.loglik_history.push_back(ll);
    if (std::isfinite(prev_ll) && ll - prev_ll < opts.tol) break;
    prev_ll = ll;

    // M-step: closed-form weight/mean/variance updates.
    std::vector<double> nk(M, 0.0);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t m = 0; m < M; ++m) nk[m] += resp(t, m);

    std::size_t degenerate = M;
    for (std::size_t m = 0; m < M; ++m)
      if (nk[m] / static_cast<double>(T) < 1e-8) { degenerate = m; break; }
    if (degenerate != M) {
      if (reseeded) throw DegenerateComponent("em_fit: component " + std::to_string(degenerate) +
                                              " collapsed twice");
      reseeded = true;
      // Move the dead component onto the worst-explained frame.
      std::size_t worst = 0;
      double worst_ll = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < T; ++t) {
        auto frame = features.row(t);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < M; ++m) {
          double q = 0.0;
          for (std::size_t d = 0; d < dim; ++d) {
            const double diff = frame[d] - g.means(m, d);
            q += diff * diff / g.variances(m, d);
          }
          best = std::max(best, -q);
        }
        if (best < worst_ll) {
          worst_ll = best;
          worst = t;
        }
      }
      auto frame = features.row(worst);
      for (std::size_t d = 0; d < dim; ++d) {
        g.means(degenerate, d) = frame[d];
        g.variances(degenerate, d) = std::max(1.0, opts.var_floor);
      }
      double wsum = 0.0;
      g.weights[degenerate] = 1.0 / static_cast<double>(M);
      for (double w : g.weights) wsum += w;
      for (double& w : g.weights) w /= wsum;
      prev_ll = -std::numeric_limits<double>::infinity();
      continue;
    }

    for (std::size_t m = 0; m < M; ++m) {
      g.weights[m] = nk[m] / static_cast<double>(T);
      for (std::size_t d = 0; d < dim; ++d) {
        double mean_acc = 0.0;
        for (std::size_t t = 0; t < T; ++t) mean_acc += resp(t, m) * features(t, d);
        const double mu = mean_acc / nk[m];
        double var_acc = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
          const double diff = features(t, d) - mu;
          var_acc += resp(t, m) * diff * diff;
        }
        g.means(m, d) = mu;
        g.variances(m, d) = std::max(var_acc / nk[m], opts.var_floor);
      }
    }
  }
  return g;
}

// Average per-frame log-likelihood of the features under the model.
inline double avg_log_likelihood(const GmmModel& g, const Matrix& features) {
  if (features.cols() != g.dim())
    throw ShapeMismatch("avg_log_likelihood: feature dimension does not match model");
  if (features.rows() == 0) throw Error("avg_log_likelihood: no frames");
  return gmm_detail::e_step(g, features).second;
}

// Equal language priors, so the MAP decision is the argmax of the average
// log-likelihood. Descending scores; name order breaks ties.
inline std::vector<std::pair<std::string, double>> classify_gmm(
    const Matrix& features, const std::map<std::string, GmmModel>& models) {
  if (models.empty()) throw Error("classify_gmm: no language models");
  std::vector<std::pair<std::string, double>> ranking;
  ranking.reserve(models.size());
  for (const auto& [name, model] : models)
    ranking.emplace_back(name, avg_log_likelihood(model, features));
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  return ranking;
}

}  // namespace lidkit
