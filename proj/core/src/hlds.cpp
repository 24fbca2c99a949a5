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

#include "mddkm/hlds.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mddkm/error.hpp"

namespace mddkm {

void HldsConfig::validate() const {
    if (layer_dims.empty()) throw InvalidInput("HLDS needs at least one layer");
    for (std::size_t l = 0; l < layer_dims.size(); ++l) {
        if (layer_dims[l] < 1) throw InvalidInput("HLDS layer dimensions must be positive");
        if (l + 1 < layer_dims.size() && layer_dims[l] % layer_dims[l + 1] != 0) {
            throw InvalidInput("HLDS layer " + std::to_string(l) + " dimension " + std::to_string(layer_dims[l]) +
                               " is not divisible by the next layer's " + std::to_string(layer_dims[l + 1]));
        }
    }
    if (window_len < 1) throw InvalidInput("window length must be positive");
    if (overlap < 0 || overlap >= window_len) {
        throw InvalidInput("overlap must satisfy 0 <= overlap < window length");
    }
    if (observation.size() == 0) {
        if (window_len != layer_dims.front()) {
            throw InvalidInput("identity observation matrix requires window length == bottom layer dimension");
        }
    } else if (observation.rows() != window_len || observation.cols() != layer_dims.front()) {
        throw InvalidInput("observation matrix must be window_len x bottom layer dimension");
    }
    if (!(innovation_scale > 0.0) || !(observation_scale > 0.0) || !(initial_cov > 0.0)) {
        throw InvalidInput("HLDS noise scales and initial covariance must be positive");
    }
}

int HldsConfig::state_dim() const {
    int n = 0;
    for (int d : layer_dims) n += d;
    return n;
}

int HldsConfig::layer_offset(std::size_t layer) const {
    int offset = 0;
    for (std::size_t j = layer + 1; j < layer_dims.size(); ++j) offset += layer_dims[j];
    return offset;
}

Eigen::MatrixXd build_coupling(int n, int s) {
    if (n < 1 || s < 1 || n % s != 0) {
        throw InvalidInput("coupling matrix needs S dividing N, got N=" + std::to_string(n) + " S=" + std::to_string(s));
    }
    const int rows_per_block = n / s;
    const double value = 2.0 * static_cast<double>(s) / static_cast<double>(n);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, s);
    for (int block = 0; block < s; ++block) {
        B.block(block * rows_per_block, block, rows_per_block, 1).setConstant(value);
    }
    return B;
}

AugmentedModel assemble(const HldsConfig& config) {
    config.validate();
    const int n = config.state_dim();
    const auto& dims = config.layer_dims;
    const int m = config.window_len;

    AugmentedModel model;
    model.transition = Eigen::MatrixXd::Identity(n, n);
    model.innovation_cov = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t l = 0; l < dims.size(); ++l) {
        const int off = config.layer_offset(l);
        model.innovation_cov.diagonal().segment(off, dims[l]).setConstant(config.innovation_scale * dims[l]);
        if (l + 1 < dims.size()) {
            // Layer l+1 drives layer l; it sits just above-left in the state order.
            model.transition.block(off, config.layer_offset(l + 1), dims[l], dims[l + 1]) =
                build_coupling(dims[l], dims[l + 1]);
        }
    }
    model.observation = Eigen::MatrixXd::Zero(m, n);
    const int bottom = config.layer_offset(0);
    if (config.observation.size() == 0) {
        model.observation.block(0, bottom, m, dims[0]).setIdentity();
    } else {
        model.observation.block(0, bottom, m, dims[0]) = config.observation;
    }
    model.observation_cov = Eigen::MatrixXd::Identity(m, m) * (config.observation_scale * m);
    return model;
}

HldsState initial_state(const HldsConfig& config) {
    config.validate();
    const int n = config.state_dim();
    return {Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n) * config.initial_cov, 0};
}

namespace {

struct Update {
    Eigen::MatrixXd gain;
    Eigen::MatrixXd cov;
};

// Covariance half of the filter: predicted covariance -> gain and posterior covariance.
Update covariance_update(const AugmentedModel& model, const Eigen::MatrixXd& cov) {
    const Eigen::MatrixXd& F = model.transition;
    const Eigen::MatrixXd& H = model.observation;
    const Eigen::MatrixXd predicted = F * cov * F.transpose() + model.innovation_cov;
    const Eigen::MatrixXd HP = H * predicted;
    const Eigen::MatrixXd S = HP * H.transpose() + model.observation_cov;
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("Kalman innovation covariance is not positive definite");
    }
    Update u;
    u.gain = llt.solve(HP).transpose();
    u.cov = predicted - u.gain * HP;
    u.cov = 0.5 * (u.cov + u.cov.transpose()).eval();
    return u;
}

}  // namespace

HldsState kalman_step(const AugmentedModel& model, const HldsState& state, const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (state.mean.size() != model.state_dim() || state.cov.rows() != model.state_dim() ||
        y.size() != model.obs_dim()) {
        throw InvalidInput("kalman_step: inconsistent state/observation dimensions");
    }
    Update u = covariance_update(model, state.cov);
    const Eigen::VectorXd predicted = model.transition * state.mean;
    HldsState next;
    next.mean = predicted + u.gain * (y - model.observation * predicted);
    next.cov = std::move(u.cov);
    next.t = state.t + 1;
    return next;
}

const char* to_string(DctNormalization norm) {
    return norm == DctNormalization::Orthonormal ? "orthonormal" : "unnormalized";
}

DctNormalization dct_normalization_from_string(const std::string& name) {
    if (name == "orthonormal") return DctNormalization::Orthonormal;
    if (name == "unnormalized") return DctNormalization::Unnormalized;
    throw InvalidInput("unknown DCT normalization '" + name + "'");
}

Eigen::MatrixXd dct_matrix(int n, DctNormalization norm) {
    if (n < 1) throw InvalidInput("DCT size must be positive");
    Eigen::MatrixXd A(n, n);
    const bool ortho = norm == DctNormalization::Orthonormal;
    const double c0 = ortho ? std::sqrt(1.0 / n) : 1.0;
    const double ck = ortho ? std::sqrt(2.0 / n) : 1.0;
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            A(k, i) = (k == 0 ? c0 : ck) * std::cos(std::numbers::pi * (i + 0.5) * k / n);
        }
    }
    return A;
}

std::size_t window_count(std::size_t length, int window_len, int overlap) {
    if (window_len < 1 || overlap < 0 || overlap >= window_len) {
        throw InvalidInput("window_count: need 0 <= overlap < window length");
    }
    const auto w = static_cast<std::size_t>(window_len);
    if (length < w) return 0;
    return (length - w) / static_cast<std::size_t>(window_len - overlap) + 1;
}

Eigen::MatrixXd preprocess(std::span<const double> audio, int window_len, int overlap, DctNormalization norm) {
    const std::size_t count = window_count(audio.size(), window_len, overlap);
    if (count == 0) {
        throw InvalidInput("audio has " + std::to_string(audio.size()) + " samples, shorter than one window of " +
                           std::to_string(window_len));
    }
    const Eigen::MatrixXd A = dct_matrix(window_len, norm);
    const std::size_t hop = static_cast<std::size_t>(window_len - overlap);
    Eigen::MatrixXd windows(window_len, static_cast<Eigen::Index>(count));
    for (std::size_t t = 0; t < count; ++t) {
        windows.col(static_cast<Eigen::Index>(t)) =
            Eigen::Map<const Eigen::VectorXd>(audio.data() + t * hop, window_len);
    }
    return (A * windows).cwiseAbs();
}

FeatureExtractor::FeatureExtractor(HldsConfig config) : config_(std::move(config)), model_(assemble(config_)) {
    constexpr std::size_t kMaxSchedule = 5000;
    constexpr double kGainTolerance = 1e-13;
    Eigen::MatrixXd cov = initial_state(config_).cov;
    for (std::size_t t = 0; t < kMaxSchedule; ++t) {
        Update u = covariance_update(model_, cov);
        const bool settled = !gains_.empty() &&
                             (u.gain - gains_.back()).cwiseAbs().maxCoeff() <=
                                 kGainTolerance * gains_.back().cwiseAbs().maxCoeff();
        gains_.push_back(std::move(u.gain));
        cov = std::move(u.cov);
        if (settled) break;
    }
}

Eigen::MatrixXd FeatureExtractor::filter_means(const Eigen::Ref<const Eigen::MatrixXd>& observations) const {
    if (observations.rows() != model_.obs_dim()) {
        throw InvalidInput("filter_means: observation dimension mismatch");
    }
    const Eigen::Index steps = observations.cols();
    Eigen::MatrixXd means(model_.state_dim(), steps);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(model_.state_dim());
    for (Eigen::Index t = 0; t < steps; ++t) {
        const auto& gain = gains_[std::min(static_cast<std::size_t>(t), gains_.size() - 1)];
        const Eigen::VectorXd predicted = model_.transition * mean;
        mean = predicted + gain * (observations.col(t) - model_.observation * predicted);
        means.col(t) = mean;
    }
    return means;
}

Eigen::MatrixXd FeatureExtractor::extract(std::span<const double> audio) const {
    const Eigen::MatrixXd y = preprocess(audio, config_.window_len, config_.overlap, config_.dct);
    const Eigen::MatrixXd means = filter_means(y);
    return means.topRows(config_.top_dim());
}

Eigen::MatrixXd extract_features(std::span<const double> audio, const HldsConfig& config) {
    return FeatureExtractor(config).extract(audio);
}

}  // namespace mddkm
