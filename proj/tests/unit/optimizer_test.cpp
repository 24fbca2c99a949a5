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
#include <limits>

#include "mddkm/error.hpp"
#include "mddkm/optimizer.hpp"

namespace mddkm {
namespace {

double rosenbrock(const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    const double a = 1.0 - x(0);
    const double b = x(1) - x(0) * x(0);
    if (g) {
        g->resize(2);
        (*g)(0) = -2.0 * a - 400.0 * x(0) * b;
        (*g)(1) = 200.0 * b;
    }
    return a * a + 100.0 * b * b;
}

TEST(Bfgs, SolvesRosenbrock) {
    BfgsOptions opts;
    opts.max_iterations = 500;
    opts.cost_tolerance = 0.0;
    const BfgsResult r = minimize_bfgs(rosenbrock, Eigen::Vector2d(-1.2, 1.0), opts);
    EXPECT_NEAR(r.x(0), 1.0, 1e-4);
    EXPECT_NEAR(r.x(1), 1.0, 1e-4);
    EXPECT_TRUE(r.converged);
}

TEST(Bfgs, CostIsNonincreasingAlongTrace) {
    const BfgsResult r = minimize_bfgs(rosenbrock, Eigen::Vector2d(-1.2, 1.0));
    ASSERT_GE(r.trace.size(), 2U);
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i].cost, r.trace[i - 1].cost);
    EXPECT_EQ(r.trace.back().cost, r.cost);
}

TEST(Bfgs, InfeasibleRegionShrinksSteps) {
    // Minimum of the quadratic lies beyond a wall at x = 1; the optimizer must stay feasible.
    Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        if (x(0) > 1.0) return std::numeric_limits<double>::infinity();
        if (g) {
            g->resize(1);
            (*g)(0) = 2.0 * (x(0) - 3.0);
        }
        return (x(0) - 3.0) * (x(0) - 3.0);
    };
    Eigen::VectorXd x0(1);
    x0 << -2.0;
    const BfgsResult r = minimize_bfgs(f, x0);
    EXPECT_LE(r.x(0), 1.0);
    EXPECT_GT(r.x(0), 0.9);
    EXPECT_TRUE(std::isfinite(r.cost));
}

TEST(Bfgs, LineSearchProbesSkipGradient) {
    int with_grad = 0;
    int total = 0;
    Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        ++total;
        if (g) {
            ++with_grad;
            *g = 2.0 * x;
        }
        return x.squaredNorm();
    };
    const BfgsResult r = minimize_bfgs(f, Eigen::Vector3d(1.0, -2.0, 0.5));
    EXPECT_LT(r.cost, 1e-10);
    EXPECT_LE(with_grad, total);
    EXPECT_LE(with_grad, r.iterations + 1);
}

TEST(Bfgs, StartAtMinimumConvergesImmediately) {
    const BfgsResult r = minimize_bfgs(rosenbrock, Eigen::Vector2d(1.0, 1.0));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 0);
    EXPECT_EQ(r.cost, 0.0);
}

TEST(Bfgs, InfeasibleStartIsRejected) {
    Objective f = [](const Eigen::VectorXd&, Eigen::VectorXd*) { return std::numeric_limits<double>::infinity(); };
    EXPECT_THROW(minimize_bfgs(f, Eigen::Vector2d(0.0, 0.0)), TrainingError);
}

}  // namespace
}  // namespace mddkm
