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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mddkm {

/// Orthonormal scales bin 0 by sqrt(1/n) and the rest by sqrt(2/n);
/// unnormalized is the plain cosine sum.
enum class DctNormalization { Orthonormal, Unnormalized };

const char* to_string(DctNormalization norm);
DctNormalization dct_normalization_from_string(const std::string& name);

/// Hierarchical linear dynamical system settings.
///
/// Layers are listed bottom (observed through H) to top. Each layer is a random
/// walk driven by the layer above through a coupling matrix. Innovation variance
/// of a layer with dimension k is innovation_scale * k; observation noise
/// variance is observation_scale * M, with M the observation dimension.
struct HldsConfig {
    std::vector<int> layer_dims{96, 24, 12};
    int window_len = 96;
    int overlap = 48;
    double innovation_scale = 1e-3;
    double observation_scale = 1e-3;
    double initial_cov = 10.0;
    DctNormalization dct = DctNormalization::Orthonormal;
    /// Observation matrix; empty means identity (requires window_len == layer_dims[0]).
    Eigen::MatrixXd observation;

    /// Throws InvalidInput on inconsistent dimensions.
    void validate() const;

    int hop() const { return window_len - overlap; }
    int state_dim() const;
    int top_dim() const { return layer_dims.back(); }
    /// Offset of layer l (0 = bottom) inside the augmented state.
    int layer_offset(std::size_t layer) const;
};

/// N x S: rows of block s (N/S of them) hold 2S/N in column s, zero elsewhere.
Eigen::MatrixXd build_coupling(int n, int s);

/// Augmented transition/observation model. State order is top layer first,
/// bottom layer last, so for two layers x~ = (z; x) and F~ = [[I, 0], [B, I]].
struct AugmentedModel {
    Eigen::MatrixXd transition;
    Eigen::MatrixXd observation;
    Eigen::MatrixXd innovation_cov;
    Eigen::MatrixXd observation_cov;

    Eigen::Index state_dim() const { return transition.rows(); }
    Eigen::Index obs_dim() const { return observation.rows(); }
};

AugmentedModel assemble(const HldsConfig& config);

struct HldsState {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    long t = 0;
};

/// Zero mean, initial_cov * I.
HldsState initial_state(const HldsConfig& config);

/// One predict + update step. Covariance is re-symmetrized after the update.
HldsState kalman_step(const AugmentedModel& model, const HldsState& state,
                      const Eigen::Ref<const Eigen::VectorXd>& y);

/// DCT-II matrix of size n (row k is the k-th basis vector).
Eigen::MatrixXd dct_matrix(int n, DctNormalization norm = DctNormalization::Orthonormal);

/// Number of windows of length `window_len` with hop `window_len - overlap`.
std::size_t window_count(std::size_t length, int window_len, int overlap);

/// |DCT(window)| per sliding window, as columns (window_len x T).
Eigen::MatrixXd preprocess(std::span<const double> audio, int window_len, int overlap,
                           DctNormalization norm = DctNormalization::Orthonormal);

/// Runs the filter over a stream. The covariance recursion does not depend on
/// the data, so gains are cached once and reused for every stream.
class FeatureExtractor {
public:
    explicit FeatureExtractor(HldsConfig config);

    const HldsConfig& config() const { return config_; }
    const AugmentedModel& model() const { return model_; }

    /// Posterior means of the full augmented state per window (state_dim x T).
    Eigen::MatrixXd filter_means(const Eigen::Ref<const Eigen::MatrixXd>& observations) const;

    /// Top-layer posterior mean per window (top_dim x T).
    Eigen::MatrixXd extract(std::span<const double> audio) const;

    /// Number of distinct gains before the cached steady-state gain takes over.
    std::size_t schedule_length() const { return gains_.size(); }

private:
    HldsConfig config_;
    AugmentedModel model_;
    std::vector<Eigen::MatrixXd> gains_;
};

/// Convenience wrapper: FeatureExtractor(config).extract(audio).
Eigen::MatrixXd extract_features(std::span<const double> audio, const HldsConfig& config);

}  // namespace mddkm
