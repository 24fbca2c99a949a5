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

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mddkm {

enum class ScoreSemantics {
    /// Raw predictive variances: lower is closer, entries >= 0.
    MddKmRaw,
    /// -log(sqrt(x)) of raw scores, or PKNN possibilities: higher is closer.
    HigherIsCloser,
};

/// Per-window class scores aligned to sliding-window indices.
struct ScoreTrack {
    Eigen::MatrixXd scores;  // T x C
    ScoreSemantics semantics = ScoreSemantics::HigherIsCloser;
    int hop = 48;
    int window_len = 96;

    Eigen::Index windows() const { return scores.rows(); }
    Eigen::Index classes() const { return scores.cols(); }
};

inline constexpr double kTransformFloor = 1e-12;

/// Entrywise -log(sqrt(max(x, floor))).
ScoreTrack transform_scores(const ScoreTrack& raw, double floor = kTransformFloor);

enum class TauMethod { MddKm, Pknn };

inline constexpr double kPknnTau = 0.0015;
inline constexpr double kMddKmTauNumerator = 1.8;

/// MddKm: numerator / mu with mu the largest transformed score on `train_track`.
/// Pknn: the constant `pknn_tau` regardless of the track.
double compute_tau(const ScoreTrack& train_track, TauMethod method, double mddkm_numerator = kMddKmTauNumerator,
                   double pknn_tau = kPknnTau);

/// Segment label: class index, or kOod.
using Label = int;
inline constexpr Label kOod = -1;

struct DecisionSegment {
    Eigen::Index start_window = 0;
    Eigen::Index end_window = 0;  // inclusive
    Label label = kOod;

    Eigen::Index length() const { return end_window - start_window + 1; }
    friend bool operator==(const DecisionSegment&, const DecisionSegment&) = default;
};

struct DecisionConfig {
    double tau = 0.0;
    int min_note_len = 35;
    int dominance_len = 60;

    void validate() const;
};

/// Per-window crisp labels (length T) from the six-step rule:
///  1. zero scores below tau;
///  2. zero nonzero runs shorter than min_note_len, per class;
///  3. label windows where one class strictly exceeds all others for more than
///     dominance_len consecutive windows;
///  4. in each remaining maximal run of undecided windows that are not all-zero,
///     replace every class score by its mean over the run;
///  5. argmax per window (ties go to the lowest class index);
///  6. relabel crisp runs shorter than min_note_len as OOD.
/// Windows whose scores are all zero after step 2 are OOD.
std::vector<Label> decide_windows(const ScoreTrack& track, const DecisionConfig& config);

/// Maximal constant-label runs of `labels`; they tile [0, T).
std::vector<DecisionSegment> segments_from_labels(const std::vector<Label>& labels);

/// decide_windows followed by segments_from_labels.
std::vector<DecisionSegment> decide(const ScoreTrack& track, const DecisionConfig& config);

/// Per-window labels expanded from segments.
std::vector<Label> labels_from_segments(const std::vector<DecisionSegment>& segments);

}  // namespace mddkm
