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
// Train/test orchestration: per-language model training over a corpus
// manifest, segment-level evaluation over the (feature x mixture x length)
// grid, and the report CSV writers. Work fans out across utterances but
// every aggregation runs in manifest order, so results are identical for
// any worker count.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lidkit/audio.hpp"
#include "lidkit/common.hpp"
#include "lidkit/features.hpp"
#include "lidkit/gmm.hpp"
#include "lidkit/manifest.hpp"
#include "lidkit/model_io.hpp"
#include "lidkit/parallel.hpp"
#include "lidkit/vq_dtw.hpp"

namespace lidkit {

struct HarnessConfig {
  int sample_rate = 16000;  // canonical rate; inputs are resampled to this
  std::size_t workers = 1;
  FeatureConfig feature;
};

// Canonical ingestion: read, resample to the canonical rate, condition.
inline Waveform load_conditioned(const std::string& path, int sample_rate) {
  return preprocess(resample(read_wav(path), sample_rate));
}

// Consecutive non-overlapping segments of exactly `seconds`; the trailing
// remainder is dropped.
inline std::vector<Waveform> segment_test(const Waveform& w, double seconds) {
  if (seconds <= 0.0) throw Error("segment_test: segment length must be positive");
  const std::size_t seg_len =
      static_cast<std::size_t>(std::llround(seconds * w.sample_rate));
  if (seg_len == 0 || w.samples.size() < seg_len)
    throw TooShort("segment_test: utterance shorter than one segment");
  const std::size_t n_segments = w.samples.size() / seg_len;
  std::vector<Waveform> out(n_segments);
  for (std::size_t i = 0; i < n_segments; ++i) {
    out[i].sample_rate = w.sample_rate;
    out[i].samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(i * seg_len),
                          w.samples.begin() + static_cast<std::ptrdiff_t>((i + 1) * seg_len));
  }
  return out;
}

// Trains one model per language on the pooled training frames. GMM training
// keeps only the first `train_seconds` of each utterance; the VQ phase uses
// whole utterances.
inline ModelSet train_all(const CorpusManifest& corpus, FeatureKind kind, Backend backend,
                          const TrainParams& params, std::uint64_t seed,
                          const HarnessConfig& cfg = {}) {
  ModelSet ms;
  ms.backend = backend;
  ms.feature = kind;
  ms.seed = seed;
  ms.params = params;

  const auto train = corpus.train_entries();
  std::vector<FeatureMatrix> per_file(train.size());
  parallel_for(train.size(), cfg.workers, [&](std::size_t i) {
    Waveform w = load_conditioned(train[i]->path, cfg.sample_rate);
    if (backend == Backend::gmm && params.train_seconds > 0.0) {
      const std::size_t keep = static_cast<std::size_t>(
          std::llround(params.train_seconds * w.sample_rate));
      if (w.samples.size() > keep) w.samples.resize(keep);
    }
    per_file[i] = extract_features(w, kind, cfg.feature);
  });
  for (const auto* e : train) ms.training_files.push_back(e->path);

  const auto languages = corpus.languages();
  std::map<std::string, Matrix> pooled;
  for (std::size_t i = 0; i < train.size(); ++i) {
    Matrix& m = pooled[train[i]->language];
    for (std::size_t r = 0; r < per_file[i].vectors.rows(); ++r)
      m.append_row(per_file[i].vectors.row(r));
  }

  if (backend == Backend::gmm) {
    EmOptions opts;
    opts.max_iters = params.em_max_iters;
    opts.tol = params.em_tol;
    opts.seed = seed;
    opts.var_floor = params.var_floor;
    std::vector<GmmModel> fitted(languages.size());
    parallel_for(languages.size(), cfg.workers, [&](std::size_t i) {
      fitted[i] = em_fit(pooled.at(languages[i]), params.mixtures, opts);
      fitted[i].language = languages[i];
    });
    for (std::size_t i = 0; i < languages.size(); ++i)
      ms.gmms.emplace(languages[i], std::move(fitted[i]));
  } else {
    LbgOptions opts;
    opts.split_eps = params.lbg_eps;
    std::vector<Codebook> fitted(languages.size());
    parallel_for(languages.size(), cfg.workers, [&](std::size_t i) {
      fitted[i] = lbg_train(pooled.at(languages[i]), params.language_codebook, opts);
    });
    for (std::size_t i = 0; i < languages.size(); ++i)
      ms.books.emplace(languages[i], std::move(fitted[i]));
  }
  return ms;
}

struct SegmentDecision {
  std::string path;
  int segment_index = 0;  // -1 for whole-utterance trials
  std::string truth;
  std::string predicted;
};

struct EvalCell {
  Backend backend = Backend::gmm;
  FeatureKind feature = FeatureKind::mfcc;
  std::size_t model_order = 0;    // mixtures (GMM) or codebook size (VQ)
  double segment_seconds = 0.0;   // 0 = whole utterance
  std::vector<std::string> labels;
  Matrix confusion;               // labels x labels counts
  std::vector<SegmentDecision> decisions;

  int total() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < confusion.rows(); ++i)
      for (std::size_t j = 0; j < confusion.cols(); ++j) acc += confusion(i, j);
    return static_cast<int>(acc);
  }
  int correct() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < confusion.rows(); ++i) acc += confusion(i, i);
    return static_cast<int>(acc);
  }
  double rate_percent() const {
    const int t = total();
    return t > 0 ? 100.0 * correct() / t : 0.0;
  }
};

struct EvalReport {
  std::vector<EvalCell> cells;
};

// Runs every model set over the test utterances. GMM sets classify each
// fixed-length segment independently for every requested length; VQ+DTW
// sets classify whole utterances.
inline EvalReport evaluate(const CorpusManifest& corpus, const std::vector<ModelSet>& sets,
                           const std::vector<double>& segment_lengths,
                           const HarnessConfig& cfg = {}) {
  if (sets.empty()) throw Error("evaluate: no model sets");
  const auto tests = corpus.test_entries();
  if (tests.empty()) throw Error("evaluate: manifest has no test utterances");

  // Label axis: corpus languages plus any extra model languages.
  std::set<std::string> label_set;
  for (const auto& language : corpus.languages()) label_set.insert(language);
  for (const auto& s : sets) {
    for (const auto& [name, g] : s.gmms) label_set.insert(name);
    for (const auto& [name, cb] : s.books) label_set.insert(name);
  }
  const std::vector<std::string> labels(label_set.begin(), label_set.end());

  std::set<FeatureKind> kinds;
  bool any_gmm = false, any_vq = false;
  for (const auto& s : sets) {
    kinds.insert(s.feature);
    (s.backend == Backend::gmm ? any_gmm : any_vq) = true;
  }
  if (any_gmm && segment_lengths.empty())
    throw Error("evaluate: GMM sets need at least one segment length");

  // Conditioned test audio, loaded once.
  std::vector<Waveform> audio(tests.size());
  parallel_for(tests.size(), cfg.workers, [&](std::size_t i) {
    audio[i] = load_conditioned(tests[i]->path, cfg.sample_rate);
  });

  // Features per (kind, utterance): whole utterance for VQ, per segment for
  // each requested length for GMM.
  struct UtteranceFeatures {
    FeatureMatrix whole;                               // VQ path
    std::map<double, std::vector<FeatureMatrix>> segments;  // GMM path
  };
  std::map<FeatureKind, std::vector<UtteranceFeatures>> features;
  for (FeatureKind kind : kinds) features[kind].resize(tests.size());
  for (FeatureKind kind : kinds) {
    auto& slot = features[kind];
    parallel_for(tests.size(), cfg.workers, [&](std::size_t i) {
      if (any_vq) slot[i].whole = extract_features(audio[i], kind, cfg.feature);
      if (any_gmm)
        for (double seconds : segment_lengths) {
          auto segs = segment_test(audio[i], seconds);
          auto& out = slot[i].segments[seconds];
          out.reserve(segs.size());
          for (const auto& seg : segs)
            out.push_back(extract_features(seg, kind, cfg.feature));
        }
    });
  }

  auto label_index = [&](const std::string& name) {
    return static_cast<std::size_t>(
        std::lower_bound(labels.begin(), labels.end(), name) - labels.begin());
  };

  EvalReport report;
  for (const auto& set : sets) {
    const auto& feats = features.at(set.feature);
    if (set.backend == Backend::gmm) {
      for (double seconds : segment_lengths) {
        EvalCell cell;
        cell.backend = Backend::gmm;
        cell.feature = set.feature;
        cell.model_order = set.params.mixtures;
        cell.segment_seconds = seconds;
        cell.labels = labels;
        cell.confusion = Matrix(labels.size(), labels.size(), 0.0);
        for (std::size_t i = 0; i < tests.size(); ++i) {
          const auto& segs = feats[i].segments.at(seconds);
          for (std::size_t s = 0; s < segs.size(); ++s) {
            auto ranking = classify_gmm(segs[s].vectors, set.gmms);
            const std::string& predicted = ranking.front().first;
            cell.confusion(label_index(tests[i]->language), label_index(predicted)) += 1.0;
            cell.decisions.push_back(
                {tests[i]->path, static_cast<int>(s), tests[i]->language, predicted});
          }
        }
        report.cells.push_back(std::move(cell));
      }
    } else {
      EvalCell cell;
      cell.backend = Backend::vq_dtw;
      cell.feature = set.feature;
      cell.model_order = set.params.language_codebook;
      cell.segment_seconds = 0.0;
      cell.labels = labels;
      cell.confusion = Matrix(labels.size(), labels.size(), 0.0);
      LbgOptions opts;
      opts.split_eps = set.params.lbg_eps;
      std::vector<std::string> predicted(tests.size());
      parallel_for(tests.size(), cfg.workers, [&](std::size_t i) {
        auto ranking =
            classify_vq_dtw(feats[i].whole, set.books, set.params.utterance_codebook, opts);
        predicted[i] = ranking.front().first;
      });
      for (std::size_t i = 0; i < tests.size(); ++i) {
        cell.confusion(label_index(tests[i]->language), label_index(predicted[i])) += 1.0;
        cell.decisions.push_back({tests[i]->path, -1, tests[i]->language, predicted[i]});
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

namespace report_detail {

inline std::string format_rate(double percent) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", percent);
  return buf;
}

inline std::string format_seconds(double seconds) {
  if (seconds <= 0.0) return "whole";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", seconds);
  return buf;
}

// Canonical row order for the grid.
inline std::vector<FeatureKind> present_kinds(const EvalReport& report, Backend backend) {
  std::vector<FeatureKind> kinds;
  for (FeatureKind kind : all_feature_kinds())
    for (const auto& cell : report.cells)
      if (cell.backend == backend && cell.feature == kind) {
        kinds.push_back(kind);
        break;
      }
  return kinds;
}

}  // namespace report_detail

// Wide grid for the GMM backend: one row per feature kind; for every
// segment length, one column per mixture count plus the across-mixtures
// average.
inline void write_gmm_report_csv(const EvalReport& report, std::ostream& out) {
  std::set<double> lengths;
  std::set<std::size_t> orders;
  for (const auto& cell : report.cells)
    if (cell.backend == Backend::gmm) {
      lengths.insert(cell.segment_seconds);
      orders.insert(cell.model_order);
    }
  out << "feature";
  for (double seconds : lengths) {
    for (std::size_t m : orders)
      out << ',' << report_detail::format_seconds(seconds) << "s_m" << m;
    out << ',' << report_detail::format_seconds(seconds) << "s_avg";
  }
  out << '\n';
  for (FeatureKind kind : report_detail::present_kinds(report, Backend::gmm)) {
    out << to_string(kind);
    for (double seconds : lengths) {
      double sum = 0.0;
      int n = 0;
      for (std::size_t m : orders) {
        const EvalCell* found = nullptr;
        for (const auto& cell : report.cells)
          if (cell.backend == Backend::gmm && cell.feature == kind &&
              cell.model_order == m && cell.segment_seconds == seconds)
            found = &cell;
        if (found) {
          out << ',' << report_detail::format_rate(found->rate_percent());
          sum += found->rate_percent();
          ++n;
        } else {
          out << ',';
        }
      }
      out << ',' << (n > 0 ? report_detail::format_rate(sum / n) : "");
    }
    out << '\n';
  }
}

inline void write_vq_report_csv(const EvalReport& report, std::ostream& out) {
  out << "feature,codebook,whole_utterance_rate\n";
  for (FeatureKind kind : report_detail::present_kinds(report, Backend::vq_dtw))
    for (const auto& cell : report.cells)
      if (cell.backend == Backend::vq_dtw && cell.feature == kind)
        out << to_string(kind) << ',' << cell.model_order << ','
            << report_detail::format_rate(cell.rate_percent()) << '\n';
}

// Long-format per-cell confusion counts (dense over the label grid).
inline void write_confusion_csv(const EvalReport& report, std::ostream& out) {
  out << "backend,feature,model_order,segment_seconds,true_language,predicted_language,count\n";
  for (const auto& cell : report.cells)
    for (std::size_t i = 0; i < cell.labels.size(); ++i)
      for (std::size_t j = 0; j < cell.labels.size(); ++j)
        out << to_string(cell.backend) << ',' << to_string(cell.feature) << ','
            << cell.model_order << ',' << report_detail::format_seconds(cell.segment_seconds)
            << ',' << cell.labels[i] << ',' << cell.labels[j] << ','
            << static_cast<long>(cell.confusion(i, j)) << '\n';
}

// Writes report_gmm.csv / report_vq_dtw.csv (when the backend is present)
// plus confusion.csv into out_dir and returns the written paths.
inline std::vector<std::string> write_report_csvs(const EvalReport& report,
                                                  const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> written;
  bool any_gmm = false, any_vq = false;
  for (const auto& cell : report.cells)
    (cell.backend == Backend::gmm ? any_gmm : any_vq) = true;

  auto write_file = [&](const std::string& name, auto writer) {
    const std::string path = (std::filesystem::path(out_dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot create report file: " + path);
    writer(out);
    if (!out) throw Error("failed writing report file: " + path);
    written.push_back(path);
  };
  if (any_gmm)
    write_file("report_gmm.csv", [&](std::ostream& o) { write_gmm_report_csv(report, o); });
  if (any_vq)
    write_file("report_vq_dtw.csv", [&](std::ostream& o) { write_vq_report_csv(report, o); });
  write_file("confusion.csv", [&](std::ostream& o) { write_confusion_csv(report, o); });
  return written;
}

// Human-readable summary grid.
inline void print_report(const EvalReport& report, std::ostream& out) {
  for (const auto& cell : report.cells) {
    out << to_string(cell.backend) << " " << to_string(cell.feature);
    if (cell.backend == Backend::gmm)
      out << " M=" << cell.model_order << " seg="
          << report_detail::format_seconds(cell.segment_seconds) << "s";
    else
      out << " K=" << cell.model_order << " whole-utterance";
    out << ": " << cell.correct() << "/" << cell.total() << " correct ("
        << report_detail::format_rate(cell.rate_percent()) << "%)\n";
  }
}

}  // namespace lidkit
