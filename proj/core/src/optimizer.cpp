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

#include "mddkm/optimizer.hpp"

#include <cmath>
#include <limits>

#include "mddkm/error.hpp"

namespace mddkm {

BfgsResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& options) {
    const Eigen::Index n = x0.size();
    BfgsResult result;
    Eigen::VectorXd grad(n);
    double cost = f(x0, &grad);
    if (!std::isfinite(cost)) {
        throw TrainingError("BFGS start point is infeasible");
    }
    result.trace.push_back({x0, cost});

    Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd x = std::move(x0);
    Eigen::VectorXd trial_grad(n);

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        result.iterations = iter;
        if (grad.lpNorm<Eigen::Infinity>() <= options.grad_tolerance * (1.0 + std::abs(cost))) {
            result.converged = true;
            break;
        }
        Eigen::VectorXd direction = -inv_hessian * grad;
        double slope = grad.dot(direction);
        if (!(slope < 0.0)) {
            // Lost descent; fall back to steepest descent.
            inv_hessian.setIdentity();
            direction = -grad;
            slope = -grad.squaredNorm();
        }
        double step = 1.0;
        const double dir_norm = direction.lpNorm<Eigen::Infinity>();
        if (dir_norm * step > options.max_step) step = options.max_step / dir_norm;

        bool accepted = false;
        double trial_cost = std::numeric_limits<double>::infinity();
        Eigen::VectorXd trial;
        for (int bt = 0; bt < options.max_backtracks; ++bt) {
            trial = x + step * direction;
            trial_cost = f(trial, nullptr);
            if (std::isfinite(trial_cost) && trial_cost <= cost + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            result.converged = true;  // no further decrease attainable at this resolution
            break;
        }
        // Gradient only at the accepted point; line-search probes are cost-only.
        trial_cost = f(trial, &trial_grad);
        if (!std::isfinite(trial_cost)) throw TrainingError("BFGS objective is not reproducible at an accepted point");

        const Eigen::VectorXd s = trial - x;
        const Eigen::VectorXd y = trial_grad - grad;
        const double decrease = cost - trial_cost;
        x = trial;
        grad = trial_grad;
        const double previous = cost;
        cost = trial_cost;
        result.trace.push_back({x, cost});

        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
            inv_hessian = (I - rho * s * y.transpose()) * inv_hessian * (I - rho * y * s.transpose()) +
                          rho * s * s.transpose();
        }
        if (s.lpNorm<Eigen::Infinity>() <= options.step_tolerance ||
            decrease <= options.cost_tolerance * (1.0 + std::abs(previous))) {
            result.converged = true;
            result.iterations = iter + 1;
            break;
        }
        result.iterations = iter + 1;
    }
    result.x = x;
    result.cost = cost;
    return result;
}

}  // namespace mddkm
