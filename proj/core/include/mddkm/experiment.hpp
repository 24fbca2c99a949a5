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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mddkm/config.hpp"
#include "mddkm/decision.hpp"
#include "mddkm/eval.hpp"
#include "mddkm/hlds.hpp"
#include "mddkm/model.hpp"
#include "mddkm/pknn.hpp"
#include "mddkm/synth.hpp"

namespace mddkm {

enum class Algorithm { MddKm, Pknn };
const char* to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

/// Corpus instance indices: training picks per training class (in class order)
/// and the remaining instances in clip order.
struct Split {
    std::vector<std::string> classes;
    std::vector<std::vector<std::size_t>> train;
    std::vector<std::size_t> test;
};

/// Throws InvalidInput if a training class has fewer than `per_class` instances.
Split split_corpus(const Corpus& corpus, int per_class, std::uint64_t seed);

struct Clip {
    std::vector<double> samples;
    GroundTruth truth;
};

/// Concatenates corpus instances in `order`. Instances of `classes` carry their
/// index as label, everything else is OOD.
Clip build_clip(const Corpus& corpus, const std::vector<std::size_t>& order, const std::vector<std::string>& classes);

/// A short clip drawn from split.test: `per_class[c]` instances of training class c
/// followed by `ood` instances of distinct OOD classes, shuffled by `seed`.
std::vector<std::size_t> demo_order(const Corpus& corpus, const Split& split, const std::vector<int>& per_class,
                                    int ood, std::uint64_t seed);

/// Features of every training instance, each filtered from the prior on its own,
/// keeping every `stride`-th window.
TrainingSet training_features(const FeatureExtractor& extractor, const Corpus& corpus, const Split& split,
                              int stride);

/// A trained scorer plus its decision threshold.
struct Detector {
    Algorithm algorithm = Algorithm::MddKm;
    std::optional<MddKmModel> model;
    std::optional<PrototypeSet> prototypes;
    int neighbors = 0;
    double tau = 0.0;

    std::vector<std::string> labels() const;
    /// Model output per window: raw variances (MDD-KM) or possibilities (PKNN).
    ScoreTrack raw_scores(const Eigen::MatrixXd& features, int hop, int window_len) const;
    /// The higher-is-closer view used by the decision layer.
    ScoreTrack decision_scores(const ScoreTrack& raw, double floor) const;
};

/// Fits on `fit`, then fixes tau from the scores of `calibration` (all training windows).
Detector train_detector(Algorithm algorithm, const TrainingSet& fit, const TrainingSet& calibration,
                        const PipelineConfig& config, std::uint64_t seed);

struct AlgorithmOutcome {
    Algorithm algorithm = Algorithm::MddKm;
    double tau = 0.0;
    std::vector<DecisionSegment> segments;
    EvalReport window;
    EvalReport note;
};

struct SeedOutcome {
    std::uint64_t seed = 0;
    std::vector<AlgorithmOutcome> algorithms;
};

/// One seed of the protocol: split, train each algorithm, score and segment the
/// test clip, and evaluate at both units.
SeedOutcome run_seed(const Corpus& corpus, const FeatureExtractor& extractor, const PipelineConfig& config,
                     std::uint64_t seed, const std::vector<Algorithm>& algorithms);

struct ExperimentResult {
    std::vector<std::string> classes;
    std::vector<SeedOutcome> seeds;
    nlohmann::json summary;
};

/// Runs every seed (in parallel when config.experiment.threads allows) and
/// aggregates per-class and macro means by unit and algorithm, with a one-sided
/// signed-rank p-value for MDD-KM > PKNN per unit when both algorithms ran.
ExperimentResult run_experiment(const Corpus& corpus, const PipelineConfig& config,
                                const std::vector<std::uint64_t>& seeds, const std::vector<Algorithm>& algorithms);

/// Plain-text table of the summary: rows unit x algorithm, columns classes and overall.
std::string format_summary(const nlohmann::json& summary);

}  // namespace mddkm
