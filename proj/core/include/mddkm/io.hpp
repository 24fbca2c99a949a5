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
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mddkm/decision.hpp"
#include "mddkm/eval.hpp"
#include "mddkm/synth.hpp"

namespace mddkm {

/// Leading "# key=value" lines of every CSV artifact.
using CsvMeta = std::map<std::string, std::string>;

struct CsvTable {
    CsvMeta meta;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws SchemaError if absent.
    std::size_t column(const std::string& name) const;
};

/// Shortest text that parses back to the same double.
std::string format_double(double v);

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Columns: window, start_sample, raw:<label>..., transformed:<label>...
CsvTable score_table(const ScoreTrack& raw, const ScoreTrack& transformed, const std::vector<std::string>& labels,
                     CsvMeta meta);

struct ScoreFile {
    ScoreTrack raw;
    ScoreTrack transformed;
    std::vector<std::string> labels;
    CsvMeta meta;
};
ScoreFile scores_from_table(const CsvTable& table);

/// Columns: start_sample, end_sample, start_window, end_window, label. Windows
/// map to samples through the hop; end_sample is exclusive.
CsvTable segment_table(const std::vector<DecisionSegment>& segments, const std::vector<std::string>& labels, int hop,
                       int window_len, CsvMeta meta);
std::vector<DecisionSegment> segments_from_table(const CsvTable& table, const std::vector<std::string>& labels);

/// Columns: start_sample, end_sample, label, source_class. OOD instances carry label "OOD".
CsvTable truth_table(const GroundTruth& truth, CsvMeta meta);
GroundTruth truth_from_table(const CsvTable& table, const std::vector<std::string>& class_labels);

/// Columns: instance, class, training, start_sample, end_sample.
CsvTable manifest_table(const Corpus& corpus, CsvMeta meta);
/// Rebuilds the corpus layout; samples are left empty.
Corpus corpus_from_manifest(const CsvTable& table);

/// Columns: start_sample, f0, f1, ... with one row per window.
CsvTable feature_table(const Eigen::MatrixXd& features, int hop, CsvMeta meta);

/// Columns: true, then one per predicted category.
CsvTable confusion_table(const EvalReport& report, CsvMeta meta);
/// Columns: category, f_score.
CsvTable f_score_table(const EvalReport& report, CsvMeta meta);

}  // namespace mddkm
