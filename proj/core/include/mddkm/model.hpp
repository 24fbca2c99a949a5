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
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mddkm/kernels.hpp"
#include "mddkm/optimizer.hpp"

namespace mddkm {

/// Per-class blocks of column signals. Block c is D x N_c.
struct TrainingSet {
    std::vector<std::string> labels;
    std::vector<Eigen::MatrixXd> blocks;

    /// C >= 1, every N_c >= 1, shared D, unique labels.
    void validate() const;

    std::size_t num_classes() const { return blocks.size(); }
    Eigen::Index dim() const { return blocks.empty() ? 0 : blocks.front().rows(); }
    Eigen::Index total_size() const;

    /// Column concatenation (X_1, ..., X_C).
    Eigen::MatrixXd concatenated() const;
};

using TargetFunction = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// x^T x, the default smooth target.
double squared_norm_target(const Eigen::Ref<const Eigen::VectorXd>& x);

Eigen::VectorXd target_vector(const Eigen::Ref<const Eigen::MatrixXd>& X,
                              const TargetFunction& target = squared_norm_target);

/// y^T K_reg^-1 y + log|K_reg| via Cholesky; +infinity if K_reg does not factor.
double nll_cost(const KernelParams& params,
                const Eigen::Ref<const Eigen::MatrixXd>& X,
                const Eigen::VectorXd& y,
                RegularizationMode mode = RegularizationMode::ConstantOffset);

/// Gradient of nll_cost with respect to (log sigma, log ell) and, when
/// `include_sigma_reg`, log sigma_reg. Throws NumericalError if K_reg does not factor.
Eigen::VectorXd nll_grad(const KernelParams& params,
                         const Eigen::Ref<const Eigen::MatrixXd>& X,
                         const Eigen::VectorXd& y,
                         RegularizationMode mode = RegularizationMode::ConstantOffset,
                         bool include_sigma_reg = false);

enum class SigmaRegHandling {
    /// Chosen per start by select_sigma_reg and held fixed.
    Fixed,
    /// Initialized like Fixed, then optimized jointly in log space.
    CoOptimize,
};

struct OptimizerConfig {
    RegularizationMode mode = RegularizationMode::ConstantOffset;
    SigmaRegHandling sigma_reg = SigmaRegHandling::Fixed;
    double cond_threshold = kDefaultConditionThreshold;
    std::vector<double> ell_factors{0.5, 1.0, 2.0};    // x median pairwise distance
    std::vector<double> sigma_factors{0.5, 2.0};       // x std of the target values
    BfgsOptions bfgs;
    std::uint64_t seed = 0;
    TargetFunction target = squared_norm_target;
};

struct StartRecord {
    KernelParams initial;
    KernelParams final;
    double initial_cost = 0.0;
    double final_cost = 0.0;
    int iterations = 0;
    bool feasible = false;
    bool converged = false;
    std::string note;
};

struct TrainingMetadata {
    std::uint64_t seed = 0;
    double final_cost = 0.0;
    double median_distance = 0.0;
    double target_std = 0.0;
    std::vector<StartRecord> starts;
};

struct ClassBlock {
    std::string label;
    Eigen::MatrixXd X;       // D x N_c
    Eigen::MatrixXd factor;  // lower Cholesky factor of kappa_reg(X, X)
};

/// Raw per-class scores, lower = closer.
using ScoreVector = Eigen::VectorXd;

inline constexpr double kScoreClampTolerance = 1e-10;

/// Learned hyperparameters plus per-class training blocks and their factors.
/// Immutable once constructed; scoring is thread-safe.
class MddKmModel {
public:
    MddKmModel(KernelParams params, RegularizationMode mode, std::vector<ClassBlock> classes,
               TrainingMetadata metadata = {});

    /// Builds the factors from the blocks.
    static MddKmModel from_blocks(KernelParams params, RegularizationMode mode,
                                  const TrainingSet& set, TrainingMetadata metadata = {});

    const KernelParams& params() const { return params_; }
    RegularizationMode mode() const { return mode_; }
    const std::vector<ClassBlock>& classes() const { return classes_; }
    const TrainingMetadata& metadata() const { return metadata_; }
    std::size_t num_classes() const { return classes_.size(); }
    Eigen::Index dim() const { return classes_.front().X.rows(); }
    std::vector<std::string> labels() const;

    /// d_c(x) = kappa(x, x) - kappa(X_c, x)^T kappa_reg(X_c, X_c)^-1 kappa(X_c, x).
    /// Values in [-kScoreClampTolerance, 0) clamp to 0; below that raises NumericalError.
    ScoreVector score(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// T x C; row t equals score(X.col(t)).
    Eigen::MatrixXd score_batch(const Eigen::Ref<const Eigen::MatrixXd>& X) const;

private:
    KernelParams params_;
    RegularizationMode mode_;
    std::vector<ClassBlock> classes_;
    TrainingMetadata metadata_;
};

/// Schur-complement form shared by score(): k_ss - |L^-1 k|^2, clamped.
double predictive_variance(const Eigen::MatrixXd& lower_factor, const Eigen::VectorXd& k_star, double k_ss);

/// Median of all pairwise Euclidean distances between columns (0 if N < 2).
double median_pairwise_distance(const Eigen::Ref<const Eigen::MatrixXd>& X);

/// Multistart minimization of nll_cost over the whole training set, then
/// per-class factorization with the learned parameters.
MddKmModel train(const TrainingSet& set, const OptimizerConfig& config = {});

}  // namespace mddkm
