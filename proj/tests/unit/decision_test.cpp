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

#include "mddkm/decision.hpp"
#include "mddkm/error.hpp"
#include "oracles.hpp"

namespace mddkm {
namespace {

ScoreTrack track(Eigen::MatrixXd scores, ScoreSemantics sem = ScoreSemantics::HigherIsCloser) {
    ScoreTrack t;
    t.scores = std::move(scores);
    t.semantics = sem;
    return t;
}

DecisionConfig cfg(double tau) {
    DecisionConfig c;
    c.tau = tau;
    return c;
}

void expect_tiles(const std::vector<DecisionSegment>& segs, Eigen::Index T) {
    ASSERT_FALSE(segs.empty());
    EXPECT_EQ(segs.front().start_window, 0);
    EXPECT_EQ(segs.back().end_window, T - 1);
    for (std::size_t i = 1; i < segs.size(); ++i) {
        EXPECT_EQ(segs[i].start_window, segs[i - 1].end_window + 1);
        EXPECT_NE(segs[i].label, segs[i - 1].label);
    }
}

TEST(TransformScores, KnownValues) {
    Eigen::MatrixXd raw(1, 3);
    raw << 1.0, std::exp(-2.0), 0.0;
    const ScoreTrack t = transform_scores(track(raw, ScoreSemantics::MddKmRaw));
    EXPECT_EQ(t.semantics, ScoreSemantics::HigherIsCloser);
    EXPECT_NEAR(t.scores(0, 0), 0.0, 1e-15);
    EXPECT_NEAR(t.scores(0, 1), 1.0, 1e-15);
    EXPECT_NEAR(t.scores(0, 2), -0.5 * std::log(kTransformFloor), 1e-12);
    EXPECT_TRUE(t.scores.allFinite());
}

TEST(TransformScores, ReversesOrder) {
    std::mt19937_64 rng(71);
    for (int i = 0; i < 100; ++i) {
        Eigen::MatrixXd raw(1, 2);
        raw << testing::uniform(rng, 1e-9, 5.0), testing::uniform(rng, 1e-9, 5.0);
        const ScoreTrack t = transform_scores(track(raw, ScoreSemantics::MddKmRaw));
        if (raw(0, 0) < raw(0, 1)) EXPECT_GT(t.scores(0, 0), t.scores(0, 1));
        if (raw(0, 0) > raw(0, 1)) EXPECT_LT(t.scores(0, 0), t.scores(0, 1));
    }
}

TEST(TransformScores, RejectsTransformedInput) {
    EXPECT_THROW(transform_scores(track(Eigen::MatrixXd::Ones(2, 2))), InvalidInput);
}

TEST(ComputeTau, MddKmRuleOnTransformedMaximum) {
    Eigen::MatrixXd raw(3, 2);
    raw << 0.5, 0.9, std::exp(-3.6), 0.2, 1.0, 1.0;  // transformed maximum 1.8
    EXPECT_NEAR(compute_tau(track(raw, ScoreSemantics::MddKmRaw), TauMethod::MddKm), 1.0, 1e-12);
    Eigen::MatrixXd transformed(2, 1);
    transformed << 3.6, 0.4;
    EXPECT_NEAR(compute_tau(track(transformed), TauMethod::MddKm), 0.5, 1e-15);
}

TEST(ComputeTau, PknnConstant) {
    EXPECT_EQ(compute_tau(track(Eigen::MatrixXd::Random(4, 3)), TauMethod::Pknn), 0.0015);
    EXPECT_EQ(compute_tau(track(Eigen::MatrixXd::Zero(1, 1)), TauMethod::Pknn), 0.0015);
}

TEST(ComputeTau, RejectsEmptyOrNonpositiveMaximum) {
    EXPECT_THROW(compute_tau(track(Eigen::MatrixXd(0, 3)), TauMethod::MddKm), InvalidInput);
    EXPECT_THROW(compute_tau(track(Eigen::MatrixXd(0, 3)), TauMethod::Pknn), InvalidInput);
    EXPECT_THROW(compute_tau(track(-Eigen::MatrixXd::Ones(2, 2)), TauMethod::MddKm), InvalidInput);
}

TEST(Decide, EverythingBelowThresholdIsOod) {
    const auto segs = decide(track(Eigen::MatrixXd::Constant(200, 3, 0.4)), cfg(0.5));
    ASSERT_EQ(segs.size(), 1U);
    EXPECT_EQ(segs[0], (DecisionSegment{0, 199, kOod}));
}

TEST(Decide, DominantRunBecomesOneSegmentFlankedByOod) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(300, 3);
    s.block(100, 1, 100, 1).setConstant(2.0);
    const auto segs = decide(track(s), cfg(1.0));
    ASSERT_EQ(segs.size(), 3U);
    EXPECT_EQ(segs[0], (DecisionSegment{0, 99, kOod}));
    EXPECT_EQ(segs[1], (DecisionSegment{100, 199, 1}));
    EXPECT_EQ(segs[2], (DecisionSegment{200, 299, kOod}));
}

TEST(Decide, ShortBlipIsErased) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(120, 2);
    s.block(50, 0, 10, 1).setConstant(5.0);
    const auto segs = decide(track(s), cfg(1.0));
    ASSERT_EQ(segs.size(), 1U);
    EXPECT_EQ(segs[0].label, kOod);
}

TEST(Decide, MinimumLengthBoundary) {
    for (int len : {34, 35}) {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(100, 2);
        s.block(20, 1, len, 1).setConstant(3.0);
        const auto labels = decide_windows(track(s), cfg(1.0));
        EXPECT_EQ(labels[30], len == 34 ? kOod : 1) << len;
    }
}

TEST(Decide, UndecidedRunUsesMeanScores) {
    // Classes alternate the lead too fast for dominance; the run goes to the
    // class with the higher mean.
    Eigen::MatrixXd s(40, 2);
    for (int t = 0; t < 40; ++t) {
        s(t, 0) = t % 2 ? 2.0 : 1.5;
        s(t, 1) = t % 2 ? 1.0 : 1.8;
    }
    const auto segs = decide(track(s), cfg(0.5));
    ASSERT_EQ(segs.size(), 1U);
    EXPECT_EQ(segs[0].label, 0);
}

TEST(Decide, TiesGoToLowestClassIndex) {
    const auto segs = decide(track(Eigen::MatrixXd::Constant(50, 3, 2.0)), cfg(1.0));
    ASSERT_EQ(segs.size(), 1U);
    EXPECT_EQ(segs[0].label, 0);
}

TEST(Decide, ShortCrispRunsBecomeOod) {
    // Class 0 dominates windows 0-69. Windows 70-89 go to class 1 on the run
    // means, which is too short a note and so becomes OOD.
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(130, 2);
    s.block(0, 0, 90, 1).setConstant(1.0);
    s.block(40, 1, 30, 1).setConstant(0.9);
    s.block(70, 1, 20, 1).setConstant(1.5);
    const auto labels = decide_windows(track(s), cfg(0.5));
    for (int t = 0; t < 70; ++t) EXPECT_EQ(labels[t], 0);
    for (int t = 70; t < 130; ++t) EXPECT_EQ(labels[t], kOod);
}

TEST(DecideProperties, RandomTracksTileAndRespectMinimumLength) {
    std::mt19937_64 rng(72);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index T = std::uniform_int_distribution<Eigen::Index>(1, 400)(rng);
        const Eigen::Index C = std::uniform_int_distribution<Eigen::Index>(1, 4)(rng);
        Eigen::MatrixXd s(T, C);
        // Piecewise-constant random levels so that runs of all lengths appear.
        for (Eigen::Index c = 0; c < C; ++c) {
            Eigen::Index t = 0;
            while (t < T) {
                const Eigen::Index len = std::uniform_int_distribution<Eigen::Index>(1, 90)(rng);
                const double level = testing::uniform(rng, 0.0, 2.0);
                for (Eigen::Index i = t; i < std::min(T, t + len); ++i) s(i, c) = level + testing::uniform(rng, 0.0, 0.1);
                t += len;
            }
        }
        const auto segs = decide(track(s), cfg(testing::uniform(rng, 0.2, 1.5)));
        expect_tiles(segs, T);
        for (const auto& seg : segs) {
            if (seg.label != kOod) EXPECT_GE(seg.length(), 35);
        }
    }
}

TEST(DecideProperties, InvariantUnderPositiveRescaling) {
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd s(250, 3);
        for (Eigen::Index c = 0; c < 3; ++c) {
            for (Eigen::Index t = 0; t < 250; ++t) s(t, c) = std::max(0.0, std::sin(0.02 * t * (c + 1) + trial) + 0.3 * testing::uniform(rng, 0.0, 1.0));
        }
        const double tau = testing::uniform(rng, 0.1, 0.8);
        const double a = std::ldexp(1.0, std::uniform_int_distribution<int>(-4, 4)(rng));
        EXPECT_EQ(decide(track(s), cfg(tau)), decide(track(a * s), cfg(a * tau)));
    }
}

TEST(Decide, RejectsBadInput) {
    EXPECT_THROW(decide(track(Eigen::MatrixXd::Ones(5, 2), ScoreSemantics::MddKmRaw), cfg(0.1)), InvalidInput);
    EXPECT_THROW(decide(track(Eigen::MatrixXd(0, 2)), cfg(0.1)), InvalidInput);
    DecisionConfig bad = cfg(0.1);
    bad.dominance_len = 10;
    EXPECT_THROW(decide(track(Eigen::MatrixXd::Ones(5, 2)), bad), InvalidInput);
    Eigen::MatrixXd nan = Eigen::MatrixXd::Ones(5, 2);
    nan(2, 1) = std::nan("");
    EXPECT_THROW(decide(track(nan), cfg(0.1)), InvalidInput);
}

TEST(Segments, RoundTripThroughLabels) {
    const std::vector<Label> labels{kOod, kOod, 0, 0, 0, 2, kOod};
    const auto segs = segments_from_labels(labels);
    ASSERT_EQ(segs.size(), 4U);
    EXPECT_EQ(labels_from_segments(segs), labels);
    std::vector<DecisionSegment> gap{{0, 1, 0}, {3, 4, 1}};
    EXPECT_THROW(labels_from_segments(gap), InvalidInput);
}

}  // namespace
}  // namespace mddkm
