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

#include "mddkm/kernels.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mddkm/error.hpp"

namespace mddkm {

void KernelParams::validate() const {
    if (!(std::isfinite(sigma) && sigma > 0.0)) {
        throw InvalidInput("kernel sigma must be positive and finite, got " + std::to_string(sigma));
    }
    if (!(std::isfinite(ell) && ell > 0.0)) {
        throw InvalidInput("kernel length-scale must be positive and finite, got " + std::to_string(ell));
    }
    if (!(std::isfinite(sigma_reg) && sigma_reg >= 0.0)) {
        throw InvalidInput("sigma_reg must be nonnegative and finite, got " + std::to_string(sigma_reg));
    }
}

const char* to_string(RegularizationMode mode) {
    switch (mode) {
        case RegularizationMode::ConstantOffset: return "constant_offset";
        case RegularizationMode::Nugget: return "nugget";
    }
    return "unknown";
}

RegularizationMode regularization_mode_from_string(const std::string& name) {
    if (name == "constant_offset") return RegularizationMode::ConstantOffset;
    if (name == "nugget") return RegularizationMode::Nugget;
    throw InvalidInput("unknown regularization mode '" + name + "'");
}

namespace {

void check_same_dim(Eigen::Index a, Eigen::Index b) {
    if (a != b) {
        throw InvalidInput("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
    }
}

inline double se_unchecked(const Eigen::Ref<const Eigen::VectorXd>& a,
                           const Eigen::Ref<const Eigen::VectorXd>& b,
                           double sigma2, double inv_ell2) {
    return sigma2 * std::exp(-(a - b).squaredNorm() * inv_ell2);
}

}  // namespace

double se_kernel(const Eigen::Ref<const Eigen::VectorXd>& a,
                 const Eigen::Ref<const Eigen::VectorXd>& b,
                 const KernelParams& params) {
    check_same_dim(a.size(), b.size());
    params.validate();
    return se_unchecked(a, b, params.sigma * params.sigma, 1.0 / (params.ell * params.ell));
}

double reg_kernel(const Eigen::Ref<const Eigen::VectorXd>& a,
                  const Eigen::Ref<const Eigen::VectorXd>& b,
                  const KernelParams& params) {
    return se_kernel(a, b, params) + params.sigma_reg * params.sigma_reg;
}

GramMatrix gram(const Eigen::Ref<const Eigen::MatrixXd>& X,
                const KernelParams& params,
                bool regularized,
                RegularizationMode mode) {
    params.validate();
    const Eigen::Index n = X.cols();
    if (n < 1 || X.rows() < 1) {
        throw InvalidInput("gram: empty signal matrix");
    }
    const double sigma2 = params.sigma * params.sigma;
    const double inv_ell2 = 1.0 / (params.ell * params.ell);

    GramMatrix out;
    out.params = params;
    out.regularized = regularized;
    out.mode = mode;
    out.values.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out.values(j, j) = sigma2;
        for (Eigen::Index i = 0; i < j; ++i) {
            const double v = se_unchecked(X.col(i), X.col(j), sigma2, inv_ell2);
            out.values(i, j) = v;
            out.values(j, i) = v;
        }
    }
    if (regularized) {
        add_regularization(out.values, params.sigma_reg, mode);
    }
    return out;
}

Eigen::VectorXd cross_kernel(const Eigen::Ref<const Eigen::MatrixXd>& X,
                             const Eigen::Ref<const Eigen::VectorXd>& x,
                             const KernelParams& params) {
    check_same_dim(X.rows(), x.size());
    const double sigma2 = params.sigma * params.sigma;
    const double inv_ell2 = 1.0 / (params.ell * params.ell);
    Eigen::VectorXd k(X.cols());
    for (Eigen::Index i = 0; i < X.cols(); ++i) {
        k(i) = se_unchecked(X.col(i), x, sigma2, inv_ell2);
    }
    return k;
}

void add_regularization(Eigen::MatrixXd& K, double sigma_reg, RegularizationMode mode) {
    const double s2 = sigma_reg * sigma_reg;
    if (s2 == 0.0) return;
    if (mode == RegularizationMode::ConstantOffset) {
        K.array() += s2;
    } else {
        K.diagonal().array() += s2;
    }
}

double cholesky_rcond(const Eigen::MatrixXd& K) {
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) return 0.0;
    // LLT can "succeed" on a numerically indefinite matrix with a tiny pivot.
    if (!(llt.matrixLLT().diagonal().array() > 0.0).all()) return 0.0;
    const double r = llt.rcond();
    return std::isfinite(r) ? r : 0.0;
}

std::vector<double> sigma_reg_ladder(const Eigen::MatrixXd& K) {
    const double mean_diag = K.diagonal().mean();
    if (!(mean_diag > 0.0)) {
        throw InvalidInput("sigma_reg ladder: Gram matrix has nonpositive mean diagonal");
    }
    const double cap = std::sqrt(mean_diag);
    const double eps = 1e-8 * cap;
    std::vector<double> ladder{0.0};
    for (double s = eps; s < cap; s *= 2.0) {
        ladder.push_back(s);
    }
    ladder.push_back(cap);
    return ladder;
}

bool is_well_conditioned(const Eigen::MatrixXd& K, double sigma_reg, RegularizationMode mode,
                         double cond_threshold) {
    Eigen::MatrixXd Kr = K;
    add_regularization(Kr, sigma_reg, mode);
    const double rcond = cholesky_rcond(Kr);
    return rcond > 0.0 && 1.0 / rcond <= cond_threshold;
}

double select_sigma_reg(const GramMatrix& K, double cond_threshold, RegularizationMode mode) {
    if (K.regularized) {
        throw InvalidInput("select_sigma_reg expects an unregularized Gram matrix");
    }
    if (!(cond_threshold > 1.0)) {
        throw InvalidInput("condition threshold must exceed 1");
    }
    for (double s : sigma_reg_ladder(K.values)) {
        if (is_well_conditioned(K.values, s, mode, cond_threshold)) {
            return s;
        }
    }
    throw ConditioningError(std::string("no sigma_reg on the ladder makes the Gram matrix well-conditioned (mode ") +
                            to_string(mode) + ", threshold " + std::to_string(cond_threshold) + ")");
}

GramMatrix center_gram(const GramMatrix& K) {
    if (K.regularized) {
        throw InvalidInput("center_gram expects an unregularized Gram matrix");
    }
    const Eigen::Index n = K.size();
    if (n < 1) throw InvalidInput("center_gram: empty matrix");
    const Eigen::RowVectorXd col_mean = K.values.colwise().mean();
    const Eigen::VectorXd row_mean = K.values.rowwise().mean();
    const double total_mean = K.values.mean();

    GramMatrix out = K;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            const double v = K.values(i, j) - row_mean(i) - col_mean(j) + total_mean;
            out.values(i, j) = v;
            out.values(j, i) = v;
        }
    }
    return out;
}

Eigen::VectorXd center_cross_kernel(const Eigen::MatrixXd& K, const Eigen::VectorXd& k_star) {
    check_same_dim(K.rows(), k_star.size());
    const Eigen::VectorXd row_mean = K.rowwise().mean();
    return (k_star.array() - k_star.mean() - row_mean.array() + K.mean()).matrix();
}

double center_self_kernel(const Eigen::MatrixXd& K, const Eigen::VectorXd& k_star, double k_ss) {
    check_same_dim(K.rows(), k_star.size());
    return k_ss - 2.0 * k_star.mean() + K.mean();
}

double kernel_mahalanobis_oracle(const Eigen::MatrixXd& K_centered,
                                 const Eigen::VectorXd& k_star_centered,
                                 double k_starstar_centered,
                                 double ridge) {
    check_same_dim(K_centered.rows(), k_star_centered.size());
    if (!(ridge > 0.0)) throw InvalidInput("kernel Mahalanobis ridge must be positive");
    const double n = static_cast<double>(K_centered.rows());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K_centered);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition of centered Gram matrix failed");
    }
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double scale = lambda.cwiseAbs().maxCoeff();
    if (lambda.minCoeff() < -1e-8 * scale) {
        throw NumericalError("centered Gram matrix is not positive semidefinite");
    }
    const double tol = 1e-12 * scale;

    // Coordinates of the test image along the normalized principal axes
    // Phi u_i / sqrt(lambda_i); the remainder is orthogonal to the span of the data.
    const Eigen::VectorXd proj = eig.eigenvectors().transpose() * k_star_centered;
    double in_span = 0.0;
    double distance = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) <= tol) continue;
        const double c2 = proj(i) * proj(i) / lambda(i);
        in_span += c2;
        distance += c2 / (lambda(i) / n + ridge);
    }
    const double residual = std::max(0.0, k_starstar_centered - in_span);
    return distance + residual / ridge;
}

}  // namespace mddkm
