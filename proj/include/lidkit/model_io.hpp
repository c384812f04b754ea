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
// Model persistence. The on-disk format is line-oriented text:
//
//   LIDKIT/1 <backend> <feature_kind>
//   key=value metadata lines
//   [language <label>]
//   keyed numeric arrays (17 significant digits)
//   ...
//   checksum=<hex CRC32 of everything above>
//
// The decimal round trip is exact, so a saved and reloaded model makes
// bit-identical decisions.

#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lidkit/common.hpp"
#include "lidkit/features.hpp"
#include "lidkit/gmm.hpp"
#include "lidkit/vq_dtw.hpp"

namespace lidkit {

enum class Backend { vq_dtw, gmm };

inline const char* to_string(Backend b) {
  return b == Backend::gmm ? "gmm" : "vq_dtw";
}

inline Backend backend_from_string(const std::string& s) {
  if (s == "gmm") return Backend::gmm;
  if (s == "vq_dtw") return Backend::vq_dtw;
  throw Error("unknown backend: '" + s + "'");
}

struct TrainParams {
  std::size_t mixtures = 8;               // GMM component count
  std::size_t language_codebook = 32;     // LBG codebook size per language
  std::size_t utterance_codebook = 32;    // LBG codebook size per test utterance
  double var_floor = 1e-4;
  double em_tol = 1e-5;
  std::size_t em_max_iters = 100;
  double lbg_eps = 0.01;
  double train_seconds = 30.0;            // GMM training truncation; <= 0 keeps all
};

struct ModelSet {
  Backend backend = Backend::gmm;
  FeatureKind feature = FeatureKind::mfcc;
  std::map<std::string, GmmModel> gmms;
  std::map<std::string, Codebook> books;
  std::uint64_t seed = 0;
  TrainParams params;
  std::string toolkit_version = kVersion;
  std::vector<std::string> training_files;
};

inline std::uint32_t crc32(const void* data, std::size_t n) {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) c = table[(c ^ p[i]) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

namespace model_detail {

inline std::string join_g17(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += format_g17(values[i]);
  }
  return out;
}

inline std::vector<double> parse_doubles(const std::string& s, const std::string& context) {
  std::vector<double> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) {
    try {
      out.push_back(parse_double(tok));
    } catch (const Error&) {
      throw BadModelFile("bad number in " + context);
    }
  }
  return out;
}

}  // namespace model_detail

inline void save_model_set(const ModelSet& ms, const std::string& path) {
  std::ostringstream body;
  body << "LIDKIT/1 " << to_string(ms.backend) << ' ' << to_string(ms.feature) << '\n';
  body << "toolkit_version=" << ms.toolkit_version << '\n';
  body << "seed=" << ms.seed << '\n';
  body << "mixtures=" << ms.params.mixtures << '\n';
  body << "language_codebook=" << ms.params.language_codebook << '\n';
  body << "utterance_codebook=" << ms.params.utterance_codebook << '\n';
  body << "var_floor=" << format_g17(ms.params.var_floor) << '\n';
  body << "em_tol=" << format_g17(ms.params.em_tol) << '\n';
  body << "em_max_iters=" << ms.params.em_max_iters << '\n';
  body << "lbg_eps=" << format_g17(ms.params.lbg_eps) << '\n';
  body << "train_seconds=" << format_g17(ms.params.train_seconds) << '\n';
  for (const auto& f : ms.training_files) body << "train_file=" << f << '\n';

  if (ms.backend == Backend::gmm) {
    for (const auto& [name, g] : ms.gmms) {
      body << "[language " << name << "]\n";
      body << "components=" << g.components() << '\n';
      body << "dim=" << g.dim() << '\n';
      body << "weights=" << model_detail::join_g17(g.weights) << '\n';
      for (std::size_t m = 0; m < g.components(); ++m)
        body << "mean_" << m << '=' << model_detail::join_g17(g.means.row(m)) << '\n';
      for (std::size_t m = 0; m < g.components(); ++m)
        body << "var_" << m << '=' << model_detail::join_g17(g.variances.row(m)) << '\n';
    }
  } else {
    for (const auto& [name, cb] : ms.books) {
      body << "[language " << name << "]\n";
      body << "size=" << cb.size() << '\n';
      body << "dim=" << cb.dim() << '\n';
      body << "distortion=" << format_g17(cb.distortion) << '\n';
      for (std::size_t k = 0; k < cb.size(); ++k)
        body << "centroid_" << k << '=' << model_detail::join_g17(cb.centroids.row(k)) << '\n';
    }
  }

  const std::string text = body.str();
  char checksum[16];
  std::snprintf(checksum, sizeof checksum, "%08x", crc32(text.data(), text.size()));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot create model file: " + path);
  out << text << "checksum=" << checksum << '\n';
  if (!out) throw Error("failed writing model file: " + path);
}

inline ModelSet load_model_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("cannot open model file: " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  // Find and verify the trailing checksum line first.
  std::size_t tail = content.rfind("checksum=");
  if (tail == std::string::npos || (tail != 0 && content[tail - 1] != '\n'))
    throw BadModelFile("missing checksum line: " + path);
  std::string checksum_hex = trim(content.substr(tail + 9));
  const std::string body = content.substr(0, tail);
  char expected[16];
  std::snprintf(expected, sizeof expected, "%08x", crc32(body.data(), body.size()));
  if (checksum_hex != expected) throw BadModelFile("checksum mismatch: " + path);

  std::istringstream iss(body);
  std::string line;
  if (!std::getline(iss, line)) throw BadModelFile("empty model file: " + path);
  auto magic = split(trim(line), ' ');
  if (magic.size() != 3 || magic[0] != "LIDKIT/1")
    throw BadModelFile("bad magic line (expected 'LIDKIT/1 <backend> <feature>'): " + path);

  ModelSet ms;
  try {
    ms.backend = backend_from_string(magic[1]);
    ms.feature = feature_kind_from_string(magic[2]);
  } catch (const Error& e) {
    throw BadModelFile(std::string(e.what()) + ": " + path);
  }

  std::string section;  // current [language X] label, empty while in header
  std::map<std::string, std::string> keys;

  auto finish_section = [&]() {
    if (section.empty()) return;
    const std::string ctx = "section [language " + section + "] of " + path;
    auto need = [&](const std::string& k) -> std::string {
      auto it = keys.find(k);
      if (it == keys.end()) throw BadModelFile("truncated model file, missing '" + k + "' in " + ctx);
      return it->second;
    };
    if (ms.backend == Backend::gmm) {
      GmmModel g;
      g.language = section;
      const auto components = static_cast<std::size_t>(parse_double(need("components")));
      const auto dim = static_cast<std::size_t>(parse_double(need("dim")));
      g.weights = model_detail::parse_doubles(need("weights"), ctx);
      if (g.weights.size() != components)
        throw BadModelFile("weight count mismatch in " + ctx);
      g.means = Matrix(components, dim);
      g.variances = Matrix(components, dim);
      for (std::size_t m = 0; m < components; ++m) {
        auto mean = model_detail::parse_doubles(need("mean_" + std::to_string(m)), ctx);
        auto var = model_detail::parse_doubles(need("var_" + std::to_string(m)), ctx);
        if (mean.size() != dim || var.size() != dim)
          throw BadModelFile("array length mismatch in " + ctx);
        for (std::size_t d = 0; d < dim; ++d) {
          g.means(m, d) = mean[d];
          g.variances(m, d) = var[d];
        }
      }
      ms.gmms.emplace(section, std::move(g));
    } else {
      Codebook cb;
      const auto size = static_cast<std::size_t>(parse_double(need("size")));
      const auto dim = static_cast<std::size_t>(parse_double(need("dim")));
      cb.distortion = parse_double(need("distortion"));
      cb.centroids = Matrix(size, dim);
      for (std::size_t k = 0; k < size; ++k) {
        auto row = model_detail::parse_doubles(need("centroid_" + std::to_string(k)), ctx);
        if (row.size() != dim) throw BadModelFile("array length mismatch in " + ctx);
        for (std::size_t d = 0; d < dim; ++d) cb.centroids(k, d) = row[d];
      }
      ms.books.emplace(section, std::move(cb));
    }
    keys.clear();
  };

  while (std::getline(iss, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.rfind("[language ", 0) != 0 || line.back() != ']')
        throw BadModelFile("bad section header '" + line + "': " + path);
      finish_section();
      section = line.substr(10, line.size() - 11);
      if (section.empty()) throw BadModelFile("empty language label: " + path);
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw BadModelFile("bad line '" + line + "': " + path);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (section.empty()) {
      if (key == "toolkit_version") ms.toolkit_version = value;
      else if (key == "seed") ms.seed = std::strtoull(value.c_str(), nullptr, 10);
      else if (key == "mixtures") ms.params.mixtures = static_cast<std::size_t>(parse_double(value));
      else if (key == "language_codebook")
        ms.params.language_codebook = static_cast<std::size_t>(parse_double(value));
      else if (key == "utterance_codebook")
        ms.params.utterance_codebook = static_cast<std::size_t>(parse_double(value));
      else if (key == "var_floor") ms.params.var_floor = parse_double(value);
      else if (key == "em_tol") ms.params.em_tol = parse_double(value);
      else if (key == "em_max_iters")
        ms.params.em_max_iters = static_cast<std::size_t>(parse_double(value));
      else if (key == "lbg_eps") ms.params.lbg_eps = parse_double(value);
      else if (key == "train_seconds") ms.params.train_seconds = parse_double(value);
      else if (key == "train_file") ms.training_files.push_back(value);
      // unknown header keys are tolerated for forward compatibility
    } else {
      keys[key] = value;
    }
  }
  finish_section();

  if (ms.backend == Backend::gmm ? ms.gmms.empty() : ms.books.empty())
    throw BadModelFile("model file has no language sections: " + path);
  return ms;
}

}  // namespace lidkit
