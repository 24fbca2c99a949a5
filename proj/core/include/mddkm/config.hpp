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
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mddkm/hlds.hpp"
#include "mddkm/kernels.hpp"
#include "mddkm/model.hpp"
#include "mddkm/pknn.hpp"
#include "mddkm/synth.hpp"

namespace mddkm {

struct MddKmSettings {
    RegularizationMode mode = RegularizationMode::Nugget;
    SigmaRegHandling sigma_reg = SigmaRegHandling::Fixed;
    double cond_threshold = kDefaultConditionThreshold;
    std::vector<double> ell_factors{0.5, 1.0, 2.0};
    std::vector<double> sigma_factors{0.5, 2.0};
    int max_iterations = 100;
    /// Keep every n-th window of each training instance.
    int train_stride = 3;
};

struct PknnSettings {
    int prototypes = 2;
    int neighbors = 3;
    int epochs_per_prototype = 200;
    double learning_rate_start = 0.5;
    double learning_rate_end = 0.01;
    double radius_end = 0.5;
    int train_stride = 1;
};

struct DecisionSettings {
    int min_note_len = 35;
    int dominance_len = 60;
    double mddkm_tau_numerator = 1.8;
    double pknn_tau = 0.0015;
    double transform_floor = 1e-12;
};

struct ExperimentSettings {
    int train_per_class = 2;
    std::vector<std::uint64_t> seeds;  // default 1..50
    std::uint64_t corpus_seed = 7;
    int threads = 0;  // 0 = hardware concurrency
};

/// Everything a pipeline run depends on. Every artifact records its hash.
struct PipelineConfig {
    HldsConfig hlds;
    MddKmSettings mddkm;
    PknnSettings pknn;
    DecisionSettings decision;
    ExperimentSettings experiment;
    SyntheticCorpusSpec corpus = SyntheticCorpusSpec::reference();
    std::uint64_t seed = 1;

    PipelineConfig();
    void validate() const;
};

nlohmann::json to_json(const PipelineConfig& config);

/// Strict parse: every key must be known; missing keys take defaults.
PipelineConfig config_from_json(const nlohmann::json& doc);

PipelineConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64-bit hex digest of the canonical JSON dump.
std::string config_hash(const PipelineConfig& config);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace mddkm
