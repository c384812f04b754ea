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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "lidkit/common.hpp"

namespace lidkit {

struct ManifestEntry {
  std::string language;
  std::string speaker;
  std::string path;  // resolved against the manifest directory
  bool is_test = false;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
  std::string directory;

  std::vector<std::string> languages() const {
    std::set<std::string> s;
    for (const auto& e : entries) s.insert(e.language);
    return {s.begin(), s.end()};
  }
  std::vector<const ManifestEntry*> train_entries(const std::string& language = "") const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries)
      if (!e.is_test && (language.empty() || e.language == language)) out.push_back(&e);
    return out;
  }
  std::vector<const ManifestEntry*> test_entries(const std::string& language = "") const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries)
      if (e.is_test && (language.empty() || e.language == language)) out.push_back(&e);
    return out;
  }
};

// Loads a corpus manifest CSV with header `language,speaker,path,role`
// (role column optional). Entries without an explicit role follow the
// default split: per language, in file order, everything but the last
// utterance trains and the last one tests. Relative paths resolve against
// the manifest's directory.
inline CorpusManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open manifest: " + path);

  CorpusManifest manifest;
  manifest.directory = std::filesystem::path(path).parent_path().string();

  std::string line;
  if (!std::getline(in, line)) throw BadManifest("empty manifest: " + path);
  std::vector<std::string> header = split(trim(line), ',');
  for (auto& h : header) h = trim(h);
  bool has_role;
  if (header == std::vector<std::string>{"language", "speaker", "path", "role"})
    has_role = true;
  else if (header == std::vector<std::string>{"language", "speaker", "path"})
    has_role = false;
  else
    throw BadManifest("manifest header must be 'language,speaker,path[,role]': " + path);

  struct RawEntry {
    ManifestEntry entry;
    bool role_given = false;
  };
  std::vector<RawEntry> raw;
  std::set<std::string> seen_paths;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    for (auto& f : fields) f = trim(f);
    if (fields.size() != header.size())
      throw BadManifest("manifest line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " columns");
    RawEntry r;
    r.entry.language = fields[0];
    r.entry.speaker = fields[1];
    r.entry.path = fields[2];
    if (r.entry.language.empty() || r.entry.path.empty())
      throw BadManifest("manifest line " + std::to_string(line_no) +
                        ": language and path are required");
    if (!seen_paths.insert(r.entry.path).second)
      throw BadManifest("manifest line " + std::to_string(line_no) + ": duplicate path '" +
                        r.entry.path + "'");
    if (has_role && !fields[3].empty()) {
      if (fields[3] == "train")
        r.entry.is_test = false;
      else if (fields[3] == "test")
        r.entry.is_test = true;
      else
        throw BadManifest("manifest line " + std::to_string(line_no) + ": unknown role '" +
                          fields[3] + "'");
      r.role_given = true;
    }
    raw.push_back(std::move(r));
  }
  if (raw.empty()) throw BadManifest("manifest has no entries: " + path);

  // Default split: the last role-less utterance of each language tests.
  for (auto it = raw.rbegin(); it != raw.rend(); ++it) {
    if (it->role_given) continue;
    bool is_last = true;
    for (auto jt = raw.rbegin(); jt != it; ++jt)
      if (!jt->role_given && jt->entry.language == it->entry.language) {
        is_last = false;
        break;
      }
    it->entry.is_test = is_last;
  }

  for (auto& r : raw) {
    std::filesystem::path p(r.entry.path);
    if (p.is_relative() && !manifest.directory.empty())
      p = std::filesystem::path(manifest.directory) / p;
    r.entry.path = p.string();
    if (!std::filesystem::exists(r.entry.path))
      throw MissingFile("manifest references missing file: " + r.entry.path);
    manifest.entries.push_back(std::move(r.entry));
  }

  for (const auto& language : manifest.languages()) {
    if (manifest.train_entries(language).empty())
      throw BadManifest("language '" + language + "' has no training utterances");
    if (manifest.test_entries(language).empty())
      throw BadManifest("language '" + language + "' has no test utterances");
  }
  return manifest;
}

}  // namespace lidkit
