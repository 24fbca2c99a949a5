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

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace mddkm {

/// Objective for minimize_bfgs. Returns +infinity for infeasible points. When
/// `grad` is non-null and the value is finite, the gradient is written to it.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct BfgsOptions {
    int max_iterations = 200;
    double grad_tolerance = 1e-6;     // on ||g||_inf, relative to 1 + |f|
    double step_tolerance = 1e-10;    // on ||dx||_inf
    double cost_tolerance = 1e-10;    // on relative decrease of f
    double max_step = 2.0;            // cap on ||dx||_inf for the first trial step
    int max_backtracks = 40;
};

struct BfgsIterate {
    Eigen::VectorXd x;
    double cost = 0.0;
};

struct BfgsResult {
    Eigen::VectorXd x;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<BfgsIterate> trace;
};

/// Dense BFGS with Armijo backtracking. Infeasible trial points shrink the step.
/// Cost is nonincreasing along the trace; the start must be feasible.
BfgsResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& options = {});

}  // namespace mddkm
