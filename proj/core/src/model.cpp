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

#include "mddkm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>

#include "mddkm/error.hpp"

namespace mddkm {

void TrainingSet::validate() const {
    if (blocks.empty()) throw InvalidInput("training set has no classes");
    if (labels.size() != blocks.size()) {
        throw InvalidInput("training set: " + std::to_string(labels.size()) + " labels for " +
                           std::to_string(blocks.size()) + " blocks");
    }
    const Eigen::Index d = blocks.front().rows();
    if (d < 1) throw InvalidInput("training set: signals have dimension 0");
    std::set<std::string> seen;
    for (std::size_t c = 0; c < blocks.size(); ++c) {
        if (blocks[c].cols() < 1) throw InvalidInput("training class '" + labels[c] + "' is empty");
        if (blocks[c].rows() != d) {
            throw InvalidInput("training class '" + labels[c] + "' has dimension " +
                               std::to_string(blocks[c].rows()) + ", expected " + std::to_string(d));
        }
        if (!blocks[c].allFinite()) throw InvalidInput("training class '" + labels[c] + "' has non-finite values");
        if (!seen.insert(labels[c]).second) throw InvalidInput("duplicate class label '" + labels[c] + "'");
    }
}

Eigen::Index TrainingSet::total_size() const {
    Eigen::Index n = 0;
    for (const auto& b : blocks) n += b.cols();
    return n;
}

Eigen::MatrixXd TrainingSet::concatenated() const {
    Eigen::MatrixXd X(dim(), total_size());
    Eigen::Index offset = 0;
    for (const auto& b : blocks) {
        X.middleCols(offset, b.cols()) = b;
        offset += b.cols();
    }
    return X;
}

double squared_norm_target(const Eigen::Ref<const Eigen::VectorXd>& x) { return x.squaredNorm(); }

Eigen::VectorXd target_vector(const Eigen::Ref<const Eigen::MatrixXd>& X, const TargetFunction& target) {
    Eigen::VectorXd y(X.cols());
    for (Eigen::Index i = 0; i < X.cols(); ++i) y(i) = target(X.col(i));
    return y;
}

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

Eigen::MatrixXd pairwise_sqdist(const Eigen::Ref<const Eigen::MatrixXd>& X) {
    const Eigen::Index n = X.cols();
    Eigen::MatrixXd D(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        D(j, j) = 0.0;
        for (Eigen::Index i = 0; i < j; ++i) {
            const double v = (X.col(i) - X.col(j)).squaredNorm();
            D(i, j) = v;
            D(j, i) = v;
        }
    }
    return D;
}

// Evaluates the cost and its log-space gradient on a fixed training set, reusing
// the pairwise squared distances across parameter values.
class NllEvaluator {
public:
    NllEvaluator(const Eigen::Ref<const Eigen::MatrixXd>& X, Eigen::VectorXd y, RegularizationMode mode)
        : sqdist_(pairwise_sqdist(X)), y_(std::move(y)), mode_(mode) {
        if (y_.size() != sqdist_.rows()) {
            throw InvalidInput("target vector length does not match the number of signals");
        }
    }

    struct Evaluation {
        double cost = kInfinity;
        double cond = kInfinity;
        Eigen::VectorXd grad;
    };

    Evaluation evaluate(const KernelParams& p, bool want_grad, bool include_sigma_reg) const {
        const double sigma2 = p.sigma * p.sigma;
        const double inv_ell2 = 1.0 / (p.ell * p.ell);
        const Eigen::MatrixXd Kse = sigma2 * (-sqdist_.array() * inv_ell2).exp().matrix();
        Eigen::MatrixXd K = Kse;
        add_regularization(K, p.sigma_reg, mode_);

        Evaluation out;
        Eigen::LLT<Eigen::MatrixXd> llt(K);
        if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().array() > 0.0).all()) {
            return out;
        }
        const Eigen::VectorXd alpha = llt.solve(y_);
        const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        out.cost = y_.dot(alpha) + logdet;
        if (!std::isfinite(out.cost)) {
            out.cost = kInfinity;
            return out;
        }
        const double rcond = llt.rcond();
        out.cond = rcond > 0.0 ? 1.0 / rcond : kInfinity;
        if (!want_grad) return out;

        const Eigen::Index n = K.rows();
        const Eigen::MatrixXd Kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
        // dg/dtheta = -alpha^T dK alpha + tr(K^-1 dK)
        auto directional = [&](const Eigen::MatrixXd& dK) {
            return -alpha.dot(dK * alpha) + (Kinv.array() * dK.array()).sum();
        };
        out.grad.resize(include_sigma_reg ? 3 : 2);
        out.grad(0) = directional(2.0 * Kse);
        out.grad(1) = directional((Kse.array() * (2.0 * inv_ell2) * sqdist_.array()).matrix());
        if (include_sigma_reg) {
            const double s2 = p.sigma_reg * p.sigma_reg;
            if (mode_ == RegularizationMode::ConstantOffset) {
                const double sum_alpha = alpha.sum();
                out.grad(2) = 2.0 * s2 * (-sum_alpha * sum_alpha + Kinv.sum());
            } else {
                out.grad(2) = 2.0 * s2 * (-alpha.squaredNorm() + Kinv.trace());
            }
        }
        return out;
    }

private:
    Eigen::MatrixXd sqdist_;
    Eigen::VectorXd y_;
    RegularizationMode mode_;
};

}  // namespace

double nll_cost(const KernelParams& params, const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::VectorXd& y,
                RegularizationMode mode) {
    params.validate();
    if (X.cols() < 1) throw InvalidInput("nll_cost: empty training matrix");
    return NllEvaluator(X, y, mode).evaluate(params, false, false).cost;
}

Eigen::VectorXd nll_grad(const KernelParams& params, const Eigen::Ref<const Eigen::MatrixXd>& X,
                         const Eigen::VectorXd& y, RegularizationMode mode, bool include_sigma_reg) {
    params.validate();
    if (X.cols() < 1) throw InvalidInput("nll_grad: empty training matrix");
    auto eval = NllEvaluator(X, y, mode).evaluate(params, true, include_sigma_reg);
    if (!std::isfinite(eval.cost)) throw NumericalError("nll_grad: regularized Gram matrix does not factor");
    return eval.grad;
}

double predictive_variance(const Eigen::MatrixXd& lower_factor, const Eigen::VectorXd& k_star, double k_ss) {
    const Eigen::VectorXd v = lower_factor.triangularView<Eigen::Lower>().solve(k_star);
    double d = k_ss - v.squaredNorm();
    if (d < 0.0) {
        if (d < -kScoreClampTolerance) {
            throw NumericalError("negative predictive variance " + std::to_string(d) + " beyond roundoff tolerance");
        }
        d = 0.0;
    }
    return d;
}

MddKmModel::MddKmModel(KernelParams params, RegularizationMode mode, std::vector<ClassBlock> classes,
                       TrainingMetadata metadata)
    : params_(params), mode_(mode), classes_(std::move(classes)), metadata_(std::move(metadata)) {
    params_.validate();
    if (classes_.empty()) throw InvalidInput("model has no classes");
    const Eigen::Index d = classes_.front().X.rows();
    for (const auto& c : classes_) {
        const Eigen::Index n = c.X.cols();
        if (c.X.rows() != d || n < 1) throw InvalidInput("model class '" + c.label + "' has inconsistent shape");
        if (c.factor.rows() != n || c.factor.cols() != n) {
            throw InvalidInput("model class '" + c.label + "' factor has wrong shape");
        }
    }
}

MddKmModel MddKmModel::from_blocks(KernelParams params, RegularizationMode mode, const TrainingSet& set,
                                   TrainingMetadata metadata) {
    set.validate();
    std::vector<ClassBlock> classes;
    classes.reserve(set.num_classes());
    for (std::size_t c = 0; c < set.num_classes(); ++c) {
        const GramMatrix K = gram(set.blocks[c], params, true, mode);
        Eigen::LLT<Eigen::MatrixXd> llt(K.values);
        if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().array() > 0.0).all()) {
            throw NumericalError("regularized Gram matrix of class '" + set.labels[c] + "' does not factor");
        }
        Eigen::MatrixXd L = llt.matrixL();
        classes.push_back({set.labels[c], set.blocks[c], std::move(L)});
    }
    return MddKmModel(params, mode, std::move(classes), std::move(metadata));
}

std::vector<std::string> MddKmModel::labels() const {
    std::vector<std::string> out;
    for (const auto& c : classes_) out.push_back(c.label);
    return out;
}

ScoreVector MddKmModel::score(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != dim()) {
        throw InvalidInput("score: test point has dimension " + std::to_string(x.size()) + ", model expects " +
                           std::to_string(dim()));
    }
    const double k_ss = params_.sigma * params_.sigma;
    ScoreVector d(static_cast<Eigen::Index>(classes_.size()));
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        // Only class-c signals enter the class-c score.
        const Eigen::VectorXd k = cross_kernel(classes_[c].X, x, params_);
        d(static_cast<Eigen::Index>(c)) = predictive_variance(classes_[c].factor, k, k_ss);
    }
    return d;
}

Eigen::MatrixXd MddKmModel::score_batch(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
    if (X.rows() != dim()) {
        throw InvalidInput("score_batch: test signals have dimension " + std::to_string(X.rows()) +
                           ", model expects " + std::to_string(dim()));
    }
    Eigen::MatrixXd out(X.cols(), static_cast<Eigen::Index>(classes_.size()));
    for (Eigen::Index t = 0; t < X.cols(); ++t) {
        out.row(t) = score(X.col(t)).transpose();
    }
    return out;
}

double median_pairwise_distance(const Eigen::Ref<const Eigen::MatrixXd>& X) {
    const Eigen::Index n = X.cols();
    if (n < 2) return 0.0;
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) dist.push_back((X.col(i) - X.col(j)).norm());
    }
    const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    if (dist.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(dist.begin(), mid);
    return 0.5 * (lower + upper);
}

MddKmModel train(const TrainingSet& set, const OptimizerConfig& config) {
    set.validate();
    if (config.ell_factors.empty() || config.sigma_factors.empty()) {
        throw InvalidInput("optimizer needs at least one start");
    }
    const Eigen::MatrixXd X = set.concatenated();
    const Eigen::VectorXd y = target_vector(X, config.target);

    TrainingMetadata meta;
    meta.seed = config.seed;
    meta.median_distance = median_pairwise_distance(X);
    const double y_mean = y.mean();
    meta.target_std = y.size() > 1 ? std::sqrt((y.array() - y_mean).square().sum() / static_cast<double>(y.size() - 1))
                                   : 0.0;
    const double ell_base = meta.median_distance > 0.0 ? meta.median_distance : 1.0;
    double sigma_base = meta.target_std;
    if (!(sigma_base > 0.0)) sigma_base = std::sqrt(std::abs(y_mean));
    if (!(sigma_base > 0.0)) sigma_base = 1.0;

    const NllEvaluator evaluator(X, y, config.mode);
    const bool co_optimize = config.sigma_reg == SigmaRegHandling::CoOptimize;

    std::optional<KernelParams> best;
    double best_cost = kInfinity;

    for (double ell_factor : config.ell_factors) {
        for (double sigma_factor : config.sigma_factors) {
            StartRecord rec;
            rec.initial = {sigma_factor * sigma_base, ell_factor * ell_base, 0.0};
            try {
                const GramMatrix K0 = gram(X, rec.initial, false);
                rec.initial.sigma_reg = select_sigma_reg(K0, config.cond_threshold, config.mode);
            } catch (const ConditioningError& e) {
                rec.note = e.what();
                meta.starts.push_back(rec);
                continue;
            }
            if (co_optimize && rec.initial.sigma_reg == 0.0) {
                rec.initial.sigma_reg = 1e-8 * rec.initial.sigma;
            }
            const double fixed_reg = rec.initial.sigma_reg;

            auto unpack = [&](const Eigen::VectorXd& v) {
                KernelParams p{std::exp(v(0)), std::exp(v(1)), co_optimize ? std::exp(v(2)) : fixed_reg};
                return p;
            };
            Objective objective = [&](const Eigen::VectorXd& v, Eigen::VectorXd* grad) {
                const KernelParams p = unpack(v);
                if (!(std::isfinite(p.sigma) && std::isfinite(p.ell) && p.sigma > 0.0 && p.ell > 0.0)) {
                    return kInfinity;
                }
                auto eval = evaluator.evaluate(p, grad != nullptr, co_optimize);
                if (!std::isfinite(eval.cost) || eval.cond > config.cond_threshold) return kInfinity;
                if (grad) *grad = eval.grad;
                return eval.cost;
            };

            Eigen::VectorXd v0(co_optimize ? 3 : 2);
            v0(0) = std::log(rec.initial.sigma);
            v0(1) = std::log(rec.initial.ell);
            if (co_optimize) v0(2) = std::log(rec.initial.sigma_reg);
            rec.initial_cost = objective(v0, nullptr);
            if (!std::isfinite(rec.initial_cost)) {
                rec.note = "start infeasible";
                meta.starts.push_back(rec);
                continue;
            }
            const BfgsResult r = minimize_bfgs(objective, v0, config.bfgs);
            rec.final = unpack(r.x);
            rec.final_cost = r.cost;
            rec.iterations = r.iterations;
            rec.converged = r.converged;
            rec.feasible = true;
            meta.starts.push_back(rec);
            if (r.cost < best_cost) {
                best_cost = r.cost;
                best = rec.final;
            }
        }
    }
    if (!best) {
        std::string why = "all optimizer starts infeasible:";
        for (const auto& s : meta.starts) why += " [" + s.note + "]";
        throw TrainingError(why);
    }
    meta.final_cost = best_cost;
    return MddKmModel::from_blocks(*best, config.mode, set, std::move(meta));
}

}  // namespace mddkm
