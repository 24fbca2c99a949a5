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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mddkm/model.hpp"

namespace mddkm {

/// Online SOM on a 1-D ring. Learning rate decays linearly, neighborhood radius
/// exponentially, both over every presentation of every epoch. The Gaussian
/// neighborhood is cut off beyond the current radius.
struct SomConfig {
    int epochs_per_prototype = 200;  // total epochs = epochs_per_prototype * P
    double learning_rate_start = 0.5;
    double learning_rate_end = 0.01;
    double radius_end = 0.5;         // start radius is P / 2
    std::uint64_t seed = 0;
};

inline constexpr double kPrototypeScaleFloor = 1e-8;

struct ClassPrototypes {
    std::string label;
    Eigen::MatrixXd prototypes;  // D x P
    Eigen::VectorXd weights;     // representativeness in (0, 1]
    Eigen::VectorXd scales;      // mean distance of assigned points, floored
};

struct PrototypeSet {
    std::vector<ClassPrototypes> classes;

    void validate() const;
    std::size_t num_classes() const { return classes.size(); }
    Eigen::Index dim() const { return classes.front().prototypes.rows(); }
    Eigen::Index total_prototypes() const;
    std::vector<std::string> labels() const;
};

/// Per-class possibilities in [0, 1]; no sum constraint.
using PossibilityVector = Eigen::VectorXd;

/// Trains one ring SOM of `P` nodes per class (P lowered to the smallest class size
/// if needed; the effective P is returned through `effective_p` when given).
///
/// Representativeness of prototype j is (n_j + 1) / (max_k n_k + 1), where n_j
/// counts class points whose nearest prototype is j.
PrototypeSet train_prototypes(const TrainingSet& set, int P, const SomConfig& config = {},
                              int* effective_p = nullptr);

/// Among the K nearest prototypes overall, class c scores
/// max_j w_j exp(-|x - p_j|^2 / eta_j^2) over its members; 0 if none are in the K-set.
PossibilityVector possibility(const PrototypeSet& prototypes, const Eigen::Ref<const Eigen::VectorXd>& x, int K);

/// T x C; row t equals possibility(prototypes, X.col(t), K).
Eigen::MatrixXd possibility_batch(const PrototypeSet& prototypes, const Eigen::Ref<const Eigen::MatrixXd>& X, int K);

}  // namespace mddkm
