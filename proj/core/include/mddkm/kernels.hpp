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

/// Hyperparameters of the squared-exponential kernel plus its regularizer.
///
/// The kernel is sigma^2 * exp(-|a - b|^2 / ell^2); sigma_reg^2 is the
/// regularization added by the regularized kernel.
struct KernelParams {
    double sigma = 1.0;
    double ell = 1.0;
    double sigma_reg = 0.0;

    /// Throws InvalidInput unless sigma > 0, ell > 0, sigma_reg >= 0 (all finite).
    void validate() const;

    friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

/// Where the regularizer sigma_reg^2 enters the Gram matrix.
enum class RegularizationMode {
    /// Added to every entry: kappa_reg(a, b) = kappa(a, b) + sigma_reg^2.
    ConstantOffset,
    /// Added to the diagonal only (GP "nugget").
    Nugget,
};

const char* to_string(RegularizationMode mode);
RegularizationMode regularization_mode_from_string(const std::string& name);

double se_kernel(const Eigen::Ref<const Eigen::VectorXd>& a,
                 const Eigen::Ref<const Eigen::VectorXd>& b,
                 const KernelParams& params);

/// se_kernel + sigma_reg^2, for any pair of points (constant-offset reading).
double reg_kernel(const Eigen::Ref<const Eigen::VectorXd>& a,
                  const Eigen::Ref<const Eigen::VectorXd>& b,
                  const KernelParams& params);

struct GramMatrix {
    Eigen::MatrixXd values;
    KernelParams params;
    bool regularized = false;
    RegularizationMode mode = RegularizationMode::ConstantOffset;

    Eigen::Index size() const { return values.rows(); }
};

/// Gram matrix of the columns of `X` (D x N). Only the upper triangle is
/// evaluated; the lower triangle is mirrored so the result is exactly symmetric.
GramMatrix gram(const Eigen::Ref<const Eigen::MatrixXd>& X,
                const KernelParams& params,
                bool regularized,
                RegularizationMode mode = RegularizationMode::ConstantOffset);

/// Unregularized kernel between every column of `X` and `x`.
Eigen::VectorXd cross_kernel(const Eigen::Ref<const Eigen::MatrixXd>& X,
                             const Eigen::Ref<const Eigen::VectorXd>& x,
                             const KernelParams& params);

/// Adds sigma_reg^2 to `K` in the given mode (in place).
void add_regularization(Eigen::MatrixXd& K, double sigma_reg, RegularizationMode mode);

/// Reciprocal of the 1-norm condition number estimate from a Cholesky factorization,
/// or 0 if the factorization fails.
double cholesky_rcond(const Eigen::MatrixXd& K);

inline constexpr double kDefaultConditionThreshold = 1e8;

/// Geometric search ladder {0, eps, 2 eps, 4 eps, ...} capped at sqrt(mean diag K),
/// with eps = 1e-8 * sqrt(mean diag K). The cap is always the last rung.
std::vector<double> sigma_reg_ladder(const Eigen::MatrixXd& K);

/// True if K + sigma_reg^2 (per `mode`) admits a Cholesky factorization whose
/// condition estimate does not exceed `cond_threshold`.
bool is_well_conditioned(const Eigen::MatrixXd& K, double sigma_reg, RegularizationMode mode,
                         double cond_threshold);

/// Smallest rung of sigma_reg_ladder(K) for which is_well_conditioned holds.
/// Throws ConditioningError if no rung passes.
double select_sigma_reg(const GramMatrix& K,
                        double cond_threshold = kDefaultConditionThreshold,
                        RegularizationMode mode = RegularizationMode::ConstantOffset);

/// H K H with H = I - 11^T / N. Input must be unregularized.
GramMatrix center_gram(const GramMatrix& K);

/// Centered cross-kernel of a test point given the uncentered Gram `K` of the
/// training set and the uncentered cross-kernel `k_star`.
Eigen::VectorXd center_cross_kernel(const Eigen::MatrixXd& K, const Eigen::VectorXd& k_star);

/// Centered self-kernel of a test point (k_ss uncentered).
double center_self_kernel(const Eigen::MatrixXd& K, const Eigen::VectorXd& k_star, double k_ss);

/// Regularized Mahalanobis distance between the feature-space image of a test
/// point and the training mean, using the covariance (1/N) sum phi phi^T + ridge I
/// expressed through the eigendecomposition of the centered Gram matrix.
///
/// Inputs must be centered consistently (center_gram, center_cross_kernel,
/// center_self_kernel). Throws NumericalError if the centered Gram matrix has an
/// eigenvalue below -1e-8 * max|eigenvalue|.
double kernel_mahalanobis_oracle(const Eigen::MatrixXd& K_centered,
                                 const Eigen::VectorXd& k_star_centered,
                                 double k_starstar_centered,
                                 double ridge);

}  // namespace mddkm
