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

#include "mddkm/decision.hpp"

#include <cmath>
#include <string>

#include "mddkm/error.hpp"

namespace mddkm {

ScoreTrack transform_scores(const ScoreTrack& raw, double floor) {
    if (raw.semantics != ScoreSemantics::MddKmRaw) {
        throw InvalidInput("transform_scores expects raw (lower-is-closer) scores");
    }
    ScoreTrack out = raw;
    out.semantics = ScoreSemantics::HigherIsCloser;
    out.scores = -0.5 * raw.scores.array().max(floor).log();
    return out;
}

double compute_tau(const ScoreTrack& train_track, TauMethod method, double mddkm_numerator, double pknn_tau) {
    if (train_track.windows() < 1 || train_track.classes() < 1) {
        throw InvalidInput("compute_tau: empty score track");
    }
    if (method == TauMethod::Pknn) return pknn_tau;
    const ScoreTrack transformed =
        train_track.semantics == ScoreSemantics::MddKmRaw ? transform_scores(train_track) : train_track;
    const double mu = transformed.scores.maxCoeff();
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw InvalidInput("compute_tau: maximum train score must be positive and finite, got " + std::to_string(mu));
    }
    return mddkm_numerator / mu;
}

void DecisionConfig::validate() const {
    if (min_note_len < 1) throw InvalidInput("min_note_len must be at least 1");
    if (dominance_len < min_note_len) throw InvalidInput("dominance_len must be at least min_note_len");
    if (!std::isfinite(tau)) throw InvalidInput("tau must be finite");
}

namespace {

template <typename Pred, typename Fn>
void for_each_run(Eigen::Index n, Pred in_run, Fn fn) {
    Eigen::Index t = 0;
    while (t < n) {
        if (!in_run(t)) {
            ++t;
            continue;
        }
        Eigen::Index end = t;
        while (end + 1 < n && in_run(end + 1)) ++end;
        fn(t, end);
        t = end + 1;
    }
}

// Class strictly above all others with a nonzero score, else kOod.
Label strict_winner(const Eigen::MatrixXd& S, Eigen::Index t) {
    Eigen::Index best;
    const double top = S.row(t).maxCoeff(&best);
    if (!(top > 0.0)) return kOod;
    for (Eigen::Index c = 0; c < S.cols(); ++c) {
        if (c != best && S(t, c) == top) return kOod;
    }
    return static_cast<Label>(best);
}

}  // namespace

std::vector<Label> decide_windows(const ScoreTrack& track, const DecisionConfig& config) {
    config.validate();
    if (track.semantics != ScoreSemantics::HigherIsCloser) {
        throw InvalidInput("decide expects higher-is-closer scores; transform raw scores first");
    }
    const Eigen::Index T = track.windows();
    const Eigen::Index C = track.classes();
    if (T < 1 || C < 1) throw InvalidInput("decide: empty score track");
    if (!track.scores.allFinite()) throw InvalidInput("decide: non-finite scores");

    // 1.
    Eigen::MatrixXd S = (track.scores.array() < config.tau).select(0.0, track.scores);

    // 2.
    for (Eigen::Index c = 0; c < C; ++c) {
        for_each_run(T, [&](Eigen::Index t) { return S(t, c) != 0.0; },
                     [&](Eigen::Index a, Eigen::Index b) {
                         if (b - a + 1 < config.min_note_len) S.col(c).segment(a, b - a + 1).setZero();
                     });
    }

    std::vector<Label> labels(static_cast<std::size_t>(T), kOod);
    std::vector<bool> decided(static_cast<std::size_t>(T), false);

    // 3.
    std::vector<Label> winner(static_cast<std::size_t>(T));
    for (Eigen::Index t = 0; t < T; ++t) winner[static_cast<std::size_t>(t)] = strict_winner(S, t);
    {
        Eigen::Index t = 0;
        while (t < T) {
            const Label w = winner[static_cast<std::size_t>(t)];
            Eigen::Index end = t;
            while (end + 1 < T && winner[static_cast<std::size_t>(end + 1)] == w) ++end;
            if (w != kOod && end - t + 1 > config.dominance_len) {
                for (Eigen::Index i = t; i <= end; ++i) {
                    labels[static_cast<std::size_t>(i)] = w;
                    decided[static_cast<std::size_t>(i)] = true;
                }
            }
            t = end + 1;
        }
    }

    // 4. + 5.
    auto undecided = [&](Eigen::Index t) {
        return !decided[static_cast<std::size_t>(t)] && (S.row(t).array() != 0.0).any();
    };
    for_each_run(T, undecided, [&](Eigen::Index a, Eigen::Index b) {
        const Eigen::RowVectorXd mean = S.middleRows(a, b - a + 1).colwise().mean();
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < C; ++c) {
            if (mean(c) > mean(best)) best = c;
        }
        for (Eigen::Index i = a; i <= b; ++i) labels[static_cast<std::size_t>(i)] = static_cast<Label>(best);
    });

    // 6.
    {
        Eigen::Index t = 0;
        while (t < T) {
            const Label l = labels[static_cast<std::size_t>(t)];
            Eigen::Index end = t;
            while (end + 1 < T && labels[static_cast<std::size_t>(end + 1)] == l) ++end;
            if (l != kOod && end - t + 1 < config.min_note_len) {
                for (Eigen::Index i = t; i <= end; ++i) labels[static_cast<std::size_t>(i)] = kOod;
            }
            t = end + 1;
        }
    }
    return labels;
}

std::vector<DecisionSegment> segments_from_labels(const std::vector<Label>& labels) {
    std::vector<DecisionSegment> out;
    const auto n = static_cast<Eigen::Index>(labels.size());
    Eigen::Index t = 0;
    while (t < n) {
        const Label l = labels[static_cast<std::size_t>(t)];
        Eigen::Index end = t;
        while (end + 1 < n && labels[static_cast<std::size_t>(end + 1)] == l) ++end;
        out.push_back({t, end, l});
        t = end + 1;
    }
    return out;
}

std::vector<DecisionSegment> decide(const ScoreTrack& track, const DecisionConfig& config) {
    return segments_from_labels(decide_windows(track, config));
}

std::vector<Label> labels_from_segments(const std::vector<DecisionSegment>& segments) {
    std::vector<Label> out;
    for (const auto& s : segments) {
        if (s.end_window < s.start_window || s.start_window != static_cast<Eigen::Index>(out.size())) {
            throw InvalidInput("segments do not tile the track contiguously");
        }
        out.insert(out.end(), static_cast<std::size_t>(s.length()), s.label);
    }
    return out;
}

}  // namespace mddkm
