/*
 * Copyright 2026 The mddkm Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mddkm/config.hpp"

namespace mddkm::cli {

/// Process exit codes, one per error family.
enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kIoFailure = 3,
    kSchemaFailure = 4,
    kInvalidInput = 5,
    kNumericalFailure = 6,
};

struct CommonOptions {
    std::filesystem::path config_path;  // empty = built-in defaults
    std::optional<std::uint64_t> seed;
    std::filesystem::path out_dir = ".";
};

/// Loads the config (or defaults) and applies the seed override.
PipelineConfig effective_config(const CommonOptions& opts);

/// Writes corpus.wav and manifest.csv, plus the seed's full test clip
/// (test_clip.wav, test_truth.csv) and a 9-instance demo clip (demo_clip.wav, demo_truth.csv).
void synth_cmd(const CommonOptions& opts, std::optional<std::uint64_t> corpus_seed);

/// Trains on the seed's training instances of the corpus in `corpus_dir`;
/// writes <algorithm>_model.json.
void train_cmd(const CommonOptions& opts, const std::filesystem::path& corpus_dir, const std::string& algorithm);

/// Scores every window of `audio`; writes scores.csv and, if asked, features.csv.
void score_cmd(const CommonOptions& opts, const std::filesystem::path& model_path,
               const std::filesystem::path& audio, bool write_features);

/// Applies the decision layer to a score CSV; writes segments.csv.
void segment_cmd(const CommonOptions& opts, const std::filesystem::path& scores_path, std::optional<double> tau);

/// Scores a segment CSV against a ground-truth CSV at both units.
void eval_segments_cmd(const CommonOptions& opts, const std::filesystem::path& segments_path,
                       const std::filesystem::path& truth_path);

/// Runs the multi-seed protocol on the corpus in `corpus_dir`; writes summary.json,
/// summary.txt, f_scores.csv and confusion.csv.
void eval_experiment_cmd(const CommonOptions& opts, const std::filesystem::path& corpus_dir,
                         const std::vector<std::string>& algorithms, const std::vector<std::uint64_t>& seeds);

/// Writes the effective config as JSON (config.json in the output directory).
void config_cmd(const CommonOptions& opts);

/// Parses arguments, dispatches, and maps exceptions to exit codes.
int run(int argc, char** argv);

}  // namespace mddkm::cli
