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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mddkm/decision.hpp"

namespace mddkm {

/// One labeled note in a clip. Samples are [start_sample, end_sample).
struct NoteInstance {
    std::size_t start_sample = 0;
    std::size_t end_sample = 0;
    Label label = kOod;        // training-class index or kOod
    std::string source_class;  // the generating class name, OOD or not
};

struct GroundTruth {
    std::vector<std::string> class_labels;  // training classes, index = Label
    std::vector<NoteInstance> instances;    // in clip order

    /// Instances tile [0, total_samples()) and labels are in range.
    void validate() const;
    std::size_t total_samples() const { return instances.empty() ? 0 : instances.back().end_sample; }

    /// Label of the instance containing each window's center sample.
    std::vector<Label> window_labels(int window_len, int overlap) const;
    /// Index into `instances` of the instance containing each window's center sample.
    std::vector<std::size_t> window_instances(int window_len, int overlap) const;
};

enum class EvalUnit { Window, Note };
const char* to_string(EvalUnit unit);

/// Rows are true categories, columns predicted; categories are the training
/// classes in order followed by OOD.
struct EvalReport {
    EvalUnit unit = EvalUnit::Window;
    std::uint64_t seed = 0;
    std::vector<std::string> categories;
    Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> confusion;
    /// Note unit only: predicted non-OOD segments that matched no true instance.
    Eigen::Matrix<long, Eigen::Dynamic, 1> spurious;
    Eigen::VectorXd f_scores;  // one per category
    /// Mean of f_scores over the training classes, plus OOD for the window unit.
    double macro_f = 0.0;

    std::size_t num_classes() const { return categories.size() - 1; }
    /// True OOD instances (or windows) assigned to a training class.
    long ood_to_class() const;
};

/// F = 2 TP / (2 TP + FP + FN), with 0/0 mapped to 0.
double f_score(long tp, long fp, long fn);

/// Window-granularity report. Both sequences hold labels in [0, C) or kOod.
EvalReport confusion_windows(const std::vector<Label>& predicted, const std::vector<Label>& truth,
                             const std::vector<std::string>& class_labels, std::uint64_t seed = 0);

/// Note-granularity report. A true instance takes the label of the predicted
/// segment with the largest window overlap if that overlap exceeds half the
/// instance's window count, and OOD otherwise.
EvalReport confusion_notes(const std::vector<DecisionSegment>& predicted, const GroundTruth& truth,
                           int window_len, int overlap, std::uint64_t seed = 0);

/// One-sided exact Wilcoxon signed-rank p-value for a > b (paired). Zero
/// differences are dropped, ties get midranks, and the null distribution is
/// computed exactly over all sign assignments of the observed ranks.
/// All-zero differences give 1.0. Requires n >= 5.
double wilcoxon_signed_rank_greater(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace mddkm
