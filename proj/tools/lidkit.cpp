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
// Command-line surface:
//   lidkit extract   WAV -> feature CSV
//   lidkit synth     generate the synthetic corpus
//   lidkit train     manifest -> model files
//   lidkit identify  model file + WAV -> ranked languages
//   lidkit evaluate  manifest + models -> report CSVs
//
// Exit codes: 0 success, 1 usage error, 2 data/model error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lidkit/lidkit.hpp"

namespace {

struct CommonOpts {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  int rate = 16000;
  std::string config;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--seed", c.seed, "Random seed recorded in all outputs");
  cmd->add_option("--workers", c.workers, "Worker threads (results are identical for any N)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--rate", c.rate, "Canonical sample rate in Hz")->check(CLI::PositiveNumber);
  cmd->add_option("--config", c.config, "Key = value config file; command-line flags win");
}

// Applies `key = value` lines as defaults for flags the user did not pass.
void apply_config(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw lidkit::MissingFile("cannot open config file: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = lidkit::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw lidkit::Error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = lidkit::trim(line.substr(0, eq));
    const std::string value = lidkit::trim(line.substr(eq + 1));
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config")
      throw lidkit::Error("config line " + std::to_string(line_no) + ": unknown key '" + key +
                          "'");
    if (opt->count() == 0) {
      opt->add_result(value);
      opt->run_callback();
    }
  }
}

// Every run prints its resolved configuration; identical printed configs
// give identical outputs.
void print_config(const std::string& command, const CommonOpts& c,
                  const std::vector<std::pair<std::string, std::string>>& extra) {
  std::cerr << "config: command=" << command << " seed=" << c.seed << " workers=" << c.workers
            << " rate=" << c.rate;
  for (const auto& [k, v] : extra) std::cerr << ' ' << k << '=' << v;
  std::cerr << '\n';
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    std::snprintf(buf, sizeof buf, "%g", v[i]);
    out += buf;
  }
  return out;
}

// Expands model arguments: directories contribute their *.lidkit files in
// name order.
std::vector<std::string> collect_model_paths(const std::vector<std::string>& args) {
  std::vector<std::string> paths;
  for (const auto& arg : args) {
    if (std::filesystem::is_directory(arg)) {
      std::vector<std::string> found;
      for (const auto& entry : std::filesystem::directory_iterator(arg))
        if (entry.is_regular_file() && entry.path().extension() == ".lidkit")
          found.push_back(entry.path().string());
      std::sort(found.begin(), found.end());
      paths.insert(paths.end(), found.begin(), found.end());
    } else {
      paths.push_back(arg);
    }
  }
  if (paths.empty()) throw lidkit::Error("no model files found");
  return paths;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lidkit: spoken language identification toolkit"};
  app.require_subcommand(1);

  // --- extract ---
  auto* extract = app.add_subcommand("extract", "Extract cepstral features from a WAV file");
  CommonOpts extract_common;
  std::string extract_feat, extract_out, extract_in;
  add_common(extract, extract_common);
  extract->add_option("--feat", extract_feat, "Feature kind: mfcc|plp|bfcc|rplp")->required();
  extract->add_option("--out", extract_out, "Output CSV path")->required();
  extract->add_option("input", extract_in, "Input WAV file")->required();

  // --- synth ---
  auto* synth = app.add_subcommand("synth", "Generate a synthetic evaluation corpus");
  CommonOpts synth_common;
  synth_common.seed = 42;
  lidkit::SynthOptions synth_opts;
  std::string synth_out;
  add_common(synth, synth_common);
  synth->add_option("--languages", synth_opts.n_languages, "Number of languages (>= 2)")
      ->check(CLI::PositiveNumber);
  synth->add_option("--speakers", synth_opts.n_speakers, "Speakers per language");
  synth->add_option("--seconds", synth_opts.utterance_seconds, "Utterance length in seconds");
  synth->add_option("--out", synth_out, "Output directory")->required();

  // --- train ---
  auto* train = app.add_subcommand("train", "Train per-language models from a manifest");
  CommonOpts train_common;
  std::string train_backend = "gmm", train_feat, train_manifest, train_out;
  std::vector<std::size_t> train_mixtures = {8};
  lidkit::TrainParams train_params;
  add_common(train, train_common);
  train->add_option("--backend", train_backend, "Classifier backend: gmm|vq_dtw");
  train->add_option("--feat", train_feat, "Feature kind: mfcc|plp|bfcc|rplp")->required();
  train->add_option("--manifest", train_manifest, "Corpus manifest CSV")->required();
  train->add_option("--out", train_out, "Output directory for model files")->required();
  train->add_option("--mixtures", train_mixtures,
                    "GMM component counts (one model file per value)")
      ->delimiter(',');
  train->add_option("--codebook-size", train_params.language_codebook,
                    "VQ language codebook size (power of two)");
  train->add_option("--utterance-codebook", train_params.utterance_codebook,
                    "VQ utterance codebook size used at identification");
  train->add_option("--var-floor", train_params.var_floor, "GMM variance floor");
  train->add_option("--train-seconds", train_params.train_seconds,
                    "Seconds kept from each GMM training utterance (<= 0 keeps all)");

  // --- identify ---
  auto* identify = app.add_subcommand("identify", "Rank languages for one WAV file");
  CommonOpts identify_common;
  std::string identify_model, identify_in;
  add_common(identify, identify_common);
  identify->add_option("--model", identify_model, "Model file (.lidkit)")->required();
  identify->add_option("input", identify_in, "Input WAV file")->required();

  // --- evaluate ---
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate models over a manifest");
  CommonOpts evaluate_common;
  std::string evaluate_manifest, evaluate_out;
  std::vector<std::string> evaluate_models;
  std::vector<double> evaluate_segments = {2.0, 4.0, 10.0};
  add_common(evaluate, evaluate_common);
  evaluate->add_option("--manifest", evaluate_manifest, "Corpus manifest CSV")->required();
  evaluate->add_option("--models", evaluate_models, "Model files or directories")->required();
  evaluate->add_option("--segments", evaluate_segments,
                       "Test segment lengths in seconds (GMM backend)")
      ->delimiter(',');
  evaluate->add_option("--out", evaluate_out, "Output directory for report CSVs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "usage error: " << e.what() << '\n';
    std::cerr << app.help() << '\n';
    return 1;
  }

  try {
    if (*extract) {
      apply_config(extract, extract_common.config);
      const auto kind = lidkit::feature_kind_from_string(extract_feat);
      print_config("extract", extract_common,
                   {{"feat", extract_feat}, {"out", extract_out}, {"input", extract_in}});
      lidkit::Waveform w =
          lidkit::load_conditioned(extract_in, extract_common.rate);
      lidkit::FeatureConfig cfg;
      auto features = lidkit::extract_features(w, kind, cfg);
      lidkit::write_feature_csv(extract_out, features);
      std::cout << extract_out << ": " << features.n_frames() << " frames\n";
    } else if (*synth) {
      apply_config(synth, synth_common.config);
      synth_opts.seed = synth_common.seed;
      synth_opts.workers = synth_common.workers;
      synth_opts.sample_rate = synth_common.rate;
      print_config("synth", synth_common,
                   {{"languages", std::to_string(synth_opts.n_languages)},
                    {"speakers", std::to_string(synth_opts.n_speakers)},
                    {"seconds", std::to_string(synth_opts.utterance_seconds)},
                    {"out", synth_out}});
      auto result = lidkit::synth_corpus(synth_out, synth_opts);
      std::cout << result.manifest_path << ": " << result.wav_paths.size() << " utterances\n";
    } else if (*train) {
      apply_config(train, train_common.config);
      const auto backend = lidkit::backend_from_string(train_backend);
      const auto kind = lidkit::feature_kind_from_string(train_feat);
      print_config("train", train_common,
                   {{"backend", train_backend},
                    {"feat", train_feat},
                    {"mixtures", join_sizes(train_mixtures)},
                    {"codebook_size", std::to_string(train_params.language_codebook)},
                    {"manifest", train_manifest},
                    {"out", train_out}});
      auto manifest = lidkit::load_manifest(train_manifest);
      lidkit::HarnessConfig cfg;
      cfg.sample_rate = train_common.rate;
      cfg.workers = train_common.workers;
      std::filesystem::create_directories(train_out);
      if (backend == lidkit::Backend::gmm) {
        for (std::size_t m : train_mixtures) {
          lidkit::TrainParams params = train_params;
          params.mixtures = m;
          auto set = lidkit::train_all(manifest, kind, backend, params, train_common.seed, cfg);
          const std::string path =
              (std::filesystem::path(train_out) /
               ("gmm_" + std::string(lidkit::to_string(kind)) + "_m" + std::to_string(m) +
                ".lidkit"))
                  .string();
          lidkit::save_model_set(set, path);
          std::cout << path << '\n';
        }
      } else {
        auto set = lidkit::train_all(manifest, kind, backend, train_params, train_common.seed,
                                     cfg);
        const std::string path =
            (std::filesystem::path(train_out) /
             ("vq_dtw_" + std::string(lidkit::to_string(kind)) + "_k" +
              std::to_string(train_params.language_codebook) + ".lidkit"))
                .string();
        lidkit::save_model_set(set, path);
        std::cout << path << '\n';
      }
    } else if (*identify) {
      apply_config(identify, identify_common.config);
      print_config("identify", identify_common,
                   {{"model", identify_model}, {"input", identify_in}});
      auto set = lidkit::load_model_set(identify_model);
      lidkit::Waveform w = lidkit::load_conditioned(identify_in, identify_common.rate);
      lidkit::FeatureConfig fcfg;
      auto features = lidkit::extract_features(w, set.feature, fcfg);
      std::vector<std::pair<std::string, double>> ranking;
      if (set.backend == lidkit::Backend::gmm)
        ranking = lidkit::classify_gmm(features.vectors, set.gmms);
      else
        ranking = lidkit::classify_vq_dtw(features, set.books, set.params.utterance_codebook);
      for (std::size_t i = 0; i < ranking.size(); ++i) {
        char score[32];
        std::snprintf(score, sizeof score, "%.6f", ranking[i].second);
        std::cout << (i + 1) << '\t' << ranking[i].first << '\t' << score << '\n';
      }
    } else if (*evaluate) {
      apply_config(evaluate, evaluate_common.config);
      print_config("evaluate", evaluate_common,
                   {{"manifest", evaluate_manifest},
                    {"segments", join_doubles(evaluate_segments)},
                    {"out", evaluate_out}});
      auto manifest = lidkit::load_manifest(evaluate_manifest);
      std::vector<lidkit::ModelSet> sets;
      for (const auto& path : collect_model_paths(evaluate_models))
        sets.push_back(lidkit::load_model_set(path));
      lidkit::HarnessConfig cfg;
      cfg.sample_rate = evaluate_common.rate;
      cfg.workers = evaluate_common.workers;
      auto report = lidkit::evaluate(manifest, sets, evaluate_segments, cfg);
      auto written = lidkit::write_report_csvs(report, evaluate_out);
      lidkit::print_report(report, std::cout);
      for (const auto& path : written) std::cout << path << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
