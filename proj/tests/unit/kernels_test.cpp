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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mddkm/error.hpp"
#include "mddkm/kernels.hpp"
#include "mddkm/model.hpp"
#include "oracles.hpp"

namespace mddkm {
namespace {

using testing::random_matrix;

TEST(SeKernel, ZeroDistanceGivesSignalVariance) {
    Eigen::Vector3d x(0.3, -1.2, 4.0);
    EXPECT_DOUBLE_EQ(se_kernel(x, x, {2.0, 1.0, 0.0}), 4.0);
}

TEST(SeKernel, UnitDistanceGivesExpMinusOne) {
    Eigen::Vector2d a(0.0, 0.0);
    Eigen::Vector2d b(1.0, 0.0);
    EXPECT_NEAR(se_kernel(a, b, {1.0, 1.0, 0.0}), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(se_kernel(a, b, {1.0, 1.0, 0.0}), 0.367879, 1e-6);
}

TEST(SeKernel, SymmetricOnRandomPairs) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        const Eigen::MatrixXd ab = random_matrix(rng, 4, 2);
        const KernelParams p{testing::uniform(rng, 0.1, 3.0), testing::uniform(rng, 0.1, 3.0), 0.0};
        EXPECT_EQ(se_kernel(ab.col(0), ab.col(1), p), se_kernel(ab.col(1), ab.col(0), p));
    }
}

TEST(SeKernel, RangeIsHalfOpenUpToSignalVariance) {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 200; ++i) {
        const Eigen::MatrixXd ab = random_matrix(rng, 3, 2);
        const KernelParams p{testing::uniform(rng, 0.1, 3.0), testing::uniform(rng, 0.5, 3.0), 0.0};
        const double k = se_kernel(ab.col(0), ab.col(1), p);
        EXPECT_GT(k, 0.0);
        EXPECT_LT(k, p.sigma * p.sigma);
        EXPECT_EQ(se_kernel(ab.col(0), ab.col(0), p), p.sigma * p.sigma);
    }
}

TEST(SeKernel, RejectsDimensionMismatchAndBadParams) {
    Eigen::Vector2d a(0.0, 1.0);
    Eigen::Vector3d b(0.0, 1.0, 2.0);
    EXPECT_THROW(se_kernel(a, b, {}), InvalidInput);
    EXPECT_THROW(se_kernel(a, a, {0.0, 1.0, 0.0}), InvalidInput);
    EXPECT_THROW(se_kernel(a, a, {1.0, -1.0, 0.0}), InvalidInput);
    EXPECT_THROW(se_kernel(a, a, {1.0, 1.0, -0.1}), InvalidInput);
}

TEST(RegKernel, DiagonalAddsRegularizerSquared) {
    Eigen::Vector2d x(1.0, 2.0);
    EXPECT_NEAR(reg_kernel(x, x, {1.0, 1.0, 0.1}), 1.01, 1e-15);
}

TEST(RegKernel, OffsetAppliesOffDiagonalToo) {
    Eigen::Vector2d a(0.0, 0.0);
    Eigen::Vector2d b(0.0, 1.0);
    EXPECT_NEAR(reg_kernel(a, b, {1.0, 1.0, 0.5}), std::exp(-1.0) + 0.25, 1e-15);
    EXPECT_NEAR(reg_kernel(a, b, {1.0, 1.0, 0.5}), 0.617879, 1e-6);
}

TEST(RegKernel, ZeroRegularizerMatchesSe) {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 100; ++i) {
        const Eigen::MatrixXd ab = random_matrix(rng, 3, 2);
        const KernelParams p{testing::uniform(rng, 0.1, 3.0), testing::uniform(rng, 0.1, 3.0), 0.0};
        EXPECT_EQ(reg_kernel(ab.col(0), ab.col(1), p), se_kernel(ab.col(0), ab.col(1), p));
    }
}

TEST(Gram, SinglePointRegularized) {
    Eigen::MatrixXd X(2, 1);
    X << 0.5, -0.5;
    const GramMatrix K = gram(X, {1.5, 1.0, 0.2}, true);
    ASSERT_EQ(K.size(), 1);
    EXPECT_DOUBLE_EQ(K.values(0, 0), 1.5 * 1.5 + 0.2 * 0.2);
}

TEST(Gram, DuplicatedColumnsGiveConstantMatrix) {
    Eigen::MatrixXd X(3, 4);
    X.colwise() = Eigen::Vector3d(0.1, 0.2, 0.3);
    const GramMatrix K = gram(X, {2.0, 0.7, 0.0}, false);
    EXPECT_TRUE((K.values.array() == 4.0).all());
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K.values);
    EXPECT_EQ(lu.rank(), 1);
}

TEST(Gram, MatchesPairwiseLoopExactly) {
    std::mt19937_64 rng(14);
    const Eigen::MatrixXd X = random_matrix(rng, 3, 5);
    const KernelParams p{1.3, 0.8, 0.0};
    const GramMatrix K = gram(X, p, false);
    for (Eigen::Index i = 0; i < 5; ++i) {
        for (Eigen::Index j = 0; j < 5; ++j) {
            EXPECT_EQ(K.values(i, j), i == j ? p.sigma * p.sigma : se_kernel(X.col(std::min(i, j)), X.col(std::max(i, j)), p));
            EXPECT_NEAR(K.values(i, j), testing::se_by_hand(X.col(i), X.col(j), p), 1e-15);
        }
    }
}

TEST(Gram, RegularizedDiagonalIsExact) {
    std::mt19937_64 rng(15);
    const Eigen::MatrixXd X = random_matrix(rng, 2, 6);
    const KernelParams p{0.9, 1.1, 0.05};
    for (auto mode : {RegularizationMode::ConstantOffset, RegularizationMode::Nugget}) {
        const GramMatrix K = gram(X, p, true, mode);
        for (Eigen::Index i = 0; i < 6; ++i) EXPECT_EQ(K.values(i, i), 0.81 + 0.0025);
        EXPECT_TRUE(K.values.isApprox(testing::gram_by_hand(X, p, true, mode), 1e-14));
    }
}

TEST(Gram, ExactlySymmetricAndPermutationEquivariant) {
    std::mt19937_64 rng(16);
    const Eigen::MatrixXd X = random_matrix(rng, 4, 9);
    const KernelParams p{1.0, 1.7, 0.1};
    const GramMatrix K = gram(X, p, true);
    EXPECT_TRUE((K.values.array() == K.values.transpose().array()).all());

    Eigen::VectorXi perm(9);
    perm << 3, 0, 8, 1, 7, 2, 6, 4, 5;
    Eigen::MatrixXd Xp(4, 9);
    for (int i = 0; i < 9; ++i) Xp.col(i) = X.col(perm(i));
    const GramMatrix Kp = gram(Xp, p, true);
    for (int i = 0; i < 9; ++i) {
        for (int j = 0; j < 9; ++j) EXPECT_DOUBLE_EQ(Kp.values(i, j), K.values(perm(i), perm(j)));
    }
}

TEST(Gram, PositiveSemidefinite) {
    std::mt19937_64 rng(17);
    const Eigen::MatrixXd X = random_matrix(rng, 3, 12);
    const GramMatrix K = gram(X, {1.0, 1.0, 0.0}, false);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K.values);
    EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-12);
    const GramMatrix Kr = gram(X, {1.0, 1.0, 0.1}, true, RegularizationMode::Nugget);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_r(Kr.values);
    EXPECT_GT(eig_r.eigenvalues().minCoeff(), 0.0);
}

TEST(Gram, RejectsEmptyInput) { EXPECT_THROW(gram(Eigen::MatrixXd(3, 0), {}, false), InvalidInput); }

TEST(SigmaRegLadder, GeometricFromScaledFloorToCap) {
    const Eigen::MatrixXd K = Eigen::MatrixXd::Identity(3, 3) * 4.0;
    const auto ladder = sigma_reg_ladder(K);
    ASSERT_GE(ladder.size(), 3U);
    EXPECT_EQ(ladder[0], 0.0);
    EXPECT_DOUBLE_EQ(ladder[1], 2e-8);
    for (std::size_t i = 2; i + 1 < ladder.size(); ++i) EXPECT_DOUBLE_EQ(ladder[i], 2.0 * ladder[i - 1]);
    EXPECT_DOUBLE_EQ(ladder.back(), 2.0);
}

TEST(SelectSigmaReg, WellConditionedInputTakesFloor) {
    GramMatrix K;
    K.values = Eigen::MatrixXd::Identity(4, 4) * 2.25;
    EXPECT_EQ(select_sigma_reg(K, 1e8), 0.0);
}

TEST(SelectSigmaReg, DuplicatedPointsNeedPositiveRegularizer) {
    Eigen::MatrixXd X(2, 2);
    X << 1.0, 1.0, -2.0, -2.0;
    const GramMatrix K = gram(X, {1.0, 1.0, 0.0}, false);
    for (auto mode : {RegularizationMode::ConstantOffset, RegularizationMode::Nugget}) {
        if (mode == RegularizationMode::ConstantOffset) {
            // A constant offset cannot fix a rank-one all-constant matrix.
            EXPECT_THROW(select_sigma_reg(K, 1e8, mode), ConditioningError);
            continue;
        }
        const double s = select_sigma_reg(K, 1e8, mode);
        EXPECT_GT(s, 0.0);
        Eigen::MatrixXd Kr = K.values;
        add_regularization(Kr, s, mode);
        Eigen::LLT<Eigen::MatrixXd> llt(Kr);
        ASSERT_EQ(llt.info(), Eigen::Success);
        EXPECT_LE(1.0 / cholesky_rcond(Kr), 1e8);
    }
}

TEST(SelectSigmaReg, ReturnsMinimalRung) {
    std::mt19937_64 rng(18);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd X = random_matrix(rng, 2, 8, 0.05);
        X.col(7) = X.col(0);
        const GramMatrix K = gram(X, {1.0, 1.0, 0.0}, false);
        {
            const auto mode = RegularizationMode::Nugget;
            const double s = select_sigma_reg(K, 1e6, mode);
            const auto ladder = sigma_reg_ladder(K.values);
            const auto it = std::find(ladder.begin(), ladder.end(), s);
            ASSERT_NE(it, ladder.end());
            EXPECT_TRUE(is_well_conditioned(K.values, s, mode, 1e6));
            if (it != ladder.begin()) EXPECT_FALSE(is_well_conditioned(K.values, *(it - 1), mode, 1e6));
        }
    }
}

TEST(SelectSigmaReg, NuggetAlwaysRescuesDuplicates) {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd X = random_matrix(rng, 3, 6);
        Eigen::MatrixXd Xd(3, 12);
        Xd << X, X;
        const KernelParams p{testing::uniform(rng, 0.2, 3.0), testing::uniform(rng, 0.2, 3.0), 0.0};
        const GramMatrix K = gram(Xd, p, false);
        KernelParams q = p;
        q.sigma_reg = select_sigma_reg(K, 1e8, RegularizationMode::Nugget);
        EXPECT_GT(q.sigma_reg, 0.0);
        Eigen::LLT<Eigen::MatrixXd> llt(gram(Xd, q, true, RegularizationMode::Nugget).values);
        EXPECT_EQ(llt.info(), Eigen::Success);
    }
}

TEST(SelectSigmaReg, RejectsBadArguments) {
    GramMatrix K;
    K.values = Eigen::MatrixXd::Identity(2, 2);
    EXPECT_THROW(select_sigma_reg(K, 1.0), InvalidInput);
    K.regularized = true;
    EXPECT_THROW(select_sigma_reg(K, 1e8), InvalidInput);
}

TEST(CenterGram, AnnihilatesConstants) {
    GramMatrix K;
    K.values = Eigen::MatrixXd::Ones(5, 5);
    EXPECT_LT(center_gram(K).values.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(CenterGram, ZeroSumsAndIdempotent) {
    std::mt19937_64 rng(20);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 3 + trial;
        const Eigen::MatrixXd X = random_matrix(rng, 3, n);
        const GramMatrix K = gram(X, {1.2, 0.9, 0.0}, false);
        const GramMatrix Kc = center_gram(K);
        const double bound = 1e-10 * static_cast<double>(n) * K.values.cwiseAbs().maxCoeff();
        EXPECT_LT(Kc.values.rowwise().sum().cwiseAbs().maxCoeff(), bound);
        EXPECT_LT(Kc.values.colwise().sum().cwiseAbs().maxCoeff(), bound);
        EXPECT_LT((center_gram(Kc).values - Kc.values).cwiseAbs().maxCoeff(), 1e-10);

        const Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
        EXPECT_LT((Kc.values - H * K.values * H).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(CenterGram, RejectsRegularizedInput) {
    GramMatrix K;
    K.values = Eigen::MatrixXd::Identity(2, 2);
    K.regularized = true;
    EXPECT_THROW(center_gram(K), InvalidInput);
}

TEST(KernelMahalanobis, SelfDistanceIsSmallest) {
    Eigen::MatrixXd X(2, 1);
    X << 0.4, -0.3;
    const KernelParams p{1.0, 1.0, 0.0};
    std::mt19937_64 rng(21);
    const double self = testing::centered_mahalanobis(X, X.col(0), p, 1e3);
    for (int i = 0; i < 20; ++i) {
        const Eigen::VectorXd x = random_matrix(rng, 2, 1);
        EXPECT_LE(self, testing::centered_mahalanobis(X, x, p, 1e3));
    }
}

TEST(KernelMahalanobis, RankingSurvivesJointRescaling) {
    std::mt19937_64 rng(22);
    const Eigen::MatrixXd X = random_matrix(rng, 3, 15);
    const Eigen::MatrixXd T = random_matrix(rng, 3, 30, 1.5);
    const KernelParams p{1.0, 1.4, 0.0};
    KernelParams scaled = p;
    scaled.ell *= 3.0;
    std::vector<double> a;
    std::vector<double> b;
    for (Eigen::Index t = 0; t < T.cols(); ++t) {
        a.push_back(testing::centered_mahalanobis(X, T.col(t), p, 1e-3));
        b.push_back(testing::centered_mahalanobis(3.0 * X, 3.0 * T.col(t), scaled, 1e-3));
    }
    EXPECT_GT(testing::spearman(a, b), 0.999999);
}

TEST(KernelMahalanobis, UncenteredFormEqualsScaledPredictiveVariance) {
    // With uncentered inputs the oracle is the second-moment Mahalanobis distance,
    // which equals N / lambda times the nugget predictive variance.
    std::mt19937_64 rng(23);
    const Eigen::MatrixXd X = random_matrix(rng, 3, 10);
    const KernelParams p{1.0, 1.3, 0.2};
    const double lambda = p.sigma_reg * p.sigma_reg;
    TrainingSet set{{"a"}, {X}};
    const MddKmModel model = MddKmModel::from_blocks(p, RegularizationMode::Nugget, set);
    const Eigen::MatrixXd K = gram(X, p, false).values;
    for (int t = 0; t < 20; ++t) {
        const Eigen::VectorXd x = random_matrix(rng, 3, 1);
        const Eigen::VectorXd k = cross_kernel(X, x, p);
        const double oracle = kernel_mahalanobis_oracle(K, k, 1.0, lambda / 10.0);
        EXPECT_NEAR(oracle * lambda / 10.0, model.score(x)(0), 1e-9);
    }
}

TEST(KernelMahalanobis, RejectsIndefiniteInput) {
    Eigen::MatrixXd K(2, 2);
    K << 1.0, 0.0, 0.0, -1.0;
    EXPECT_THROW(kernel_mahalanobis_oracle(K, Eigen::Vector2d(0.1, 0.1), 1.0, 0.1), NumericalError);
}

}  // namespace
}  // namespace mddkm
