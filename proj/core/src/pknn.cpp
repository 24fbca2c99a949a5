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

#include "mddkm/pknn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <tuple>

#include "mddkm/error.hpp"

namespace mddkm {

void PrototypeSet::validate() const {
    if (classes.empty()) throw InvalidInput("prototype set has no classes");
    const Eigen::Index d = classes.front().prototypes.rows();
    const Eigen::Index p = classes.front().prototypes.cols();
    for (const auto& c : classes) {
        if (c.prototypes.rows() != d || c.prototypes.cols() != p || p < 1) {
            throw InvalidInput("prototype class '" + c.label + "' has inconsistent shape");
        }
        if (c.weights.size() != p || c.scales.size() != p) {
            throw InvalidInput("prototype class '" + c.label + "' weights/scales have wrong length");
        }
        if ((c.weights.array() <= 0.0).any() || (c.weights.array() > 1.0).any()) {
            throw InvalidInput("prototype weights must lie in (0, 1]");
        }
        if ((c.scales.array() <= 0.0).any()) throw InvalidInput("prototype scales must be positive");
    }
}

Eigen::Index PrototypeSet::total_prototypes() const {
    Eigen::Index n = 0;
    for (const auto& c : classes) n += c.prototypes.cols();
    return n;
}

std::vector<std::string> PrototypeSet::labels() const {
    std::vector<std::string> out;
    for (const auto& c : classes) out.push_back(c.label);
    return out;
}

namespace {

Eigen::Index nearest(const Eigen::MatrixXd& nodes, const Eigen::Ref<const Eigen::VectorXd>& x) {
    Eigen::Index best = 0;
    double best_d = (nodes.col(0) - x).squaredNorm();
    for (Eigen::Index j = 1; j < nodes.cols(); ++j) {
        const double d = (nodes.col(j) - x).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

ClassPrototypes train_class(const std::string& label, const Eigen::MatrixXd& X, int P, const SomConfig& config,
                            std::mt19937_64& rng) {
    const Eigen::Index n = X.cols();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    // Initialize nodes from P distinct class samples.
    std::shuffle(order.begin(), order.end(), rng);
    Eigen::MatrixXd nodes(X.rows(), P);
    for (int j = 0; j < P; ++j) nodes.col(j) = X.col(order[static_cast<std::size_t>(j)]);

    const long epochs = static_cast<long>(config.epochs_per_prototype) * P;
    const double total = static_cast<double>(epochs) * static_cast<double>(n);
    const double radius_start = std::max(0.5 * P, config.radius_end);
    double step = 0.0;
    for (long epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index idx : order) {
            const double progress = total > 1.0 ? step / (total - 1.0) : 1.0;
            const double rate = config.learning_rate_start +
                                (config.learning_rate_end - config.learning_rate_start) * progress;
            const double radius = radius_start * std::pow(config.radius_end / radius_start, progress);
            const auto x = X.col(idx);
            const Eigen::Index winner = nearest(nodes, x);
            for (int j = 0; j < P; ++j) {
                const long raw = std::labs(static_cast<long>(j) - static_cast<long>(winner));
                const double ring = static_cast<double>(std::min<long>(raw, P - raw));
                // Gaussian cut at the radius, so the last phase moves winners only.
                if (ring > radius) continue;
                const double h = std::exp(-(ring * ring) / (2.0 * radius * radius));
                nodes.col(j) += rate * h * (x - nodes.col(j));
            }
            step += 1.0;
        }
    }

    ClassPrototypes out;
    out.label = label;
    out.prototypes = nodes;
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(P);
    Eigen::VectorXd dist_sum = Eigen::VectorXd::Zero(P);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index j = nearest(nodes, X.col(i));
        counts(j) += 1.0;
        dist_sum(j) += (X.col(i) - nodes.col(j)).norm();
    }
    const double max_count = counts.maxCoeff();
    out.weights = (counts.array() + 1.0) / (max_count + 1.0);
    out.scales.resize(P);
    for (int j = 0; j < P; ++j) {
        const double mean = counts(j) > 0.0 ? dist_sum(j) / counts(j) : 0.0;
        out.scales(j) = std::max(mean, kPrototypeScaleFloor);
    }
    return out;
}

}  // namespace

PrototypeSet train_prototypes(const TrainingSet& set, int P, const SomConfig& config, int* effective_p) {
    set.validate();
    if (P < 1) throw InvalidInput("prototype count must be positive");
    Eigen::Index smallest = set.blocks.front().cols();
    for (const auto& b : set.blocks) smallest = std::min(smallest, b.cols());
    const int p = static_cast<int>(std::min<Eigen::Index>(P, smallest));
    if (effective_p) *effective_p = p;

    std::mt19937_64 rng(config.seed);
    PrototypeSet out;
    for (std::size_t c = 0; c < set.num_classes(); ++c) {
        out.classes.push_back(train_class(set.labels[c], set.blocks[c], p, config, rng));
    }
    return out;
}

PossibilityVector possibility(const PrototypeSet& prototypes, const Eigen::Ref<const Eigen::VectorXd>& x, int K) {
    if (x.size() != prototypes.dim()) {
        throw InvalidInput("possibility: test point has dimension " + std::to_string(x.size()) + ", prototypes have " +
                           std::to_string(prototypes.dim()));
    }
    const Eigen::Index total = prototypes.total_prototypes();
    if (K < 1 || K > total) {
        throw InvalidInput("neighbor count K must be in [1, " + std::to_string(total) + "]");
    }
    // (squared distance, class, prototype); ties resolve by class then prototype index.
    std::vector<std::tuple<double, std::size_t, Eigen::Index>> cand;
    cand.reserve(static_cast<std::size_t>(total));
    for (std::size_t c = 0; c < prototypes.num_classes(); ++c) {
        const auto& cp = prototypes.classes[c];
        for (Eigen::Index j = 0; j < cp.prototypes.cols(); ++j) {
            cand.emplace_back((cp.prototypes.col(j) - x).squaredNorm(), c, j);
        }
    }
    std::partial_sort(cand.begin(), cand.begin() + K, cand.end());

    PossibilityVector out = PossibilityVector::Zero(static_cast<Eigen::Index>(prototypes.num_classes()));
    for (int k = 0; k < K; ++k) {
        const auto& [d2, c, j] = cand[static_cast<std::size_t>(k)];
        const auto& cp = prototypes.classes[c];
        const double eta = cp.scales(j);
        const double value = cp.weights(j) * std::exp(-d2 / (eta * eta));
        auto& slot = out(static_cast<Eigen::Index>(c));
        slot = std::max(slot, value);
    }
    return out;
}

Eigen::MatrixXd possibility_batch(const PrototypeSet& prototypes, const Eigen::Ref<const Eigen::MatrixXd>& X, int K) {
    Eigen::MatrixXd out(X.cols(), static_cast<Eigen::Index>(prototypes.num_classes()));
    for (Eigen::Index t = 0; t < X.cols(); ++t) out.row(t) = possibility(prototypes, X.col(t), K).transpose();
    return out;
}

}  // namespace mddkm
