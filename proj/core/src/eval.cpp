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

#include "mddkm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mddkm/error.hpp"
#include "mddkm/hlds.hpp"

namespace mddkm {

void GroundTruth::validate() const {
    std::size_t cursor = 0;
    for (const auto& inst : instances) {
        if (inst.start_sample != cursor || inst.end_sample <= inst.start_sample) {
            throw InvalidInput("ground-truth instances do not tile the clip");
        }
        if (inst.label != kOod && (inst.label < 0 || inst.label >= static_cast<Label>(class_labels.size()))) {
            throw InvalidInput("ground-truth label " + std::to_string(inst.label) + " outside the alphabet");
        }
        cursor = inst.end_sample;
    }
}

std::vector<std::size_t> GroundTruth::window_instances(int window_len, int overlap) const {
    validate();
    const std::size_t count = window_count(total_samples(), window_len, overlap);
    const std::size_t hop = static_cast<std::size_t>(window_len - overlap);
    std::vector<std::size_t> out(count);
    std::size_t inst = 0;
    for (std::size_t t = 0; t < count; ++t) {
        const std::size_t center = t * hop + static_cast<std::size_t>(window_len) / 2;
        while (instances[inst].end_sample <= center) ++inst;
        out[t] = inst;
    }
    return out;
}

std::vector<Label> GroundTruth::window_labels(int window_len, int overlap) const {
    const auto idx = window_instances(window_len, overlap);
    std::vector<Label> out(idx.size());
    for (std::size_t t = 0; t < idx.size(); ++t) out[t] = instances[idx[t]].label;
    return out;
}

const char* to_string(EvalUnit unit) { return unit == EvalUnit::Window ? "window" : "note"; }

long EvalReport::ood_to_class() const {
    const auto c = static_cast<Eigen::Index>(num_classes());
    return confusion.row(c).head(c).sum();
}

double f_score(long tp, long fp, long fn) {
    const long denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

namespace {

Eigen::Index category(Label l, std::size_t num_classes) {
    if (l == kOod) return static_cast<Eigen::Index>(num_classes);
    if (l < 0 || l >= static_cast<Label>(num_classes)) {
        throw InvalidInput("label " + std::to_string(l) + " outside the alphabet");
    }
    return l;
}

void finish(EvalReport& r, std::size_t scored_categories) {
    const Eigen::Index n = r.confusion.rows();
    r.f_scores.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const long tp = r.confusion(k, k);
        const long fp = r.confusion.col(k).sum() - tp + r.spurious(k);
        const long fn = r.confusion.row(k).sum() - tp;
        r.f_scores(k) = f_score(tp, fp, fn);
    }
    r.macro_f = r.f_scores.head(static_cast<Eigen::Index>(scored_categories)).mean();
}

EvalReport empty_report(EvalUnit unit, const std::vector<std::string>& class_labels, std::uint64_t seed) {
    if (class_labels.empty()) throw InvalidInput("evaluation needs at least one training class");
    EvalReport r;
    r.unit = unit;
    r.seed = seed;
    r.categories = class_labels;
    r.categories.push_back("OOD");
    const auto n = static_cast<Eigen::Index>(r.categories.size());
    r.confusion.setZero(n, n);
    r.spurious.setZero(n);
    return r;
}

}  // namespace

EvalReport confusion_windows(const std::vector<Label>& predicted, const std::vector<Label>& truth,
                             const std::vector<std::string>& class_labels, std::uint64_t seed) {
    if (predicted.size() != truth.size()) {
        throw InvalidInput("window evaluation: " + std::to_string(predicted.size()) + " predictions for " +
                           std::to_string(truth.size()) + " true windows");
    }
    EvalReport r = empty_report(EvalUnit::Window, class_labels, seed);
    for (std::size_t t = 0; t < truth.size(); ++t) {
        r.confusion(category(truth[t], class_labels.size()), category(predicted[t], class_labels.size())) += 1;
    }
    finish(r, class_labels.size() + 1);
    return r;
}

EvalReport confusion_notes(const std::vector<DecisionSegment>& predicted, const GroundTruth& truth, int window_len,
                           int overlap, std::uint64_t seed) {
    EvalReport r = empty_report(EvalUnit::Note, truth.class_labels, seed);
    const auto windows = truth.window_instances(window_len, overlap);
    const std::vector<Label> pred_labels = labels_from_segments(predicted);
    if (pred_labels.size() != windows.size()) {
        throw InvalidInput("note evaluation: segments cover " + std::to_string(pred_labels.size()) +
                           " windows, clip has " + std::to_string(windows.size()));
    }
    const std::size_t C = truth.class_labels.size();
    // overlap[i][s] in windows, computed by a single sweep.
    std::vector<std::size_t> segment_of(windows.size());
    for (std::size_t s = 0; s < predicted.size(); ++s) {
        for (Eigen::Index t = predicted[s].start_window; t <= predicted[s].end_window; ++t) {
            segment_of[static_cast<std::size_t>(t)] = s;
        }
    }
    std::vector<std::vector<std::pair<std::size_t, long>>> overlaps(truth.instances.size());
    std::vector<long> inst_len(truth.instances.size(), 0);
    for (std::size_t t = 0; t < windows.size(); ++t) {
        auto& row = overlaps[windows[t]];
        const std::size_t s = segment_of[t];
        inst_len[windows[t]] += 1;
        if (!row.empty() && row.back().first == s) {
            row.back().second += 1;
        } else {
            row.emplace_back(s, 1);
        }
    }
    std::vector<bool> used(predicted.size(), false);
    for (std::size_t i = 0; i < truth.instances.size(); ++i) {
        Label assigned = kOod;
        if (!overlaps[i].empty()) {
            const auto best = std::max_element(overlaps[i].begin(), overlaps[i].end(),
                                               [](const auto& a, const auto& b) { return a.second < b.second; });
            if (2 * best->second > inst_len[i]) {
                assigned = predicted[best->first].label;
                used[best->first] = true;
            }
        }
        r.confusion(category(truth.instances[i].label, C), category(assigned, C)) += 1;
    }
    for (std::size_t s = 0; s < predicted.size(); ++s) {
        if (!used[s] && predicted[s].label != kOod) r.spurious(category(predicted[s].label, C)) += 1;
    }
    finish(r, C);
    return r;
}

double wilcoxon_signed_rank_greater(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw InvalidInput("signed-rank test needs paired samples of equal length");
    if (a.size() < 5) throw InvalidInput("signed-rank test needs at least 5 pairs");
    std::vector<double> diff;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (!std::isfinite(d)) throw InvalidInput("signed-rank test: non-finite sample");
        if (d != 0.0) diff.push_back(d);
    }
    const std::size_t n = diff.size();
    if (n == 0) return 1.0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return std::abs(diff[i]) < std::abs(diff[j]); });
    // Doubled midranks are integers.
    std::vector<long> rank2(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(diff[order[j + 1]]) == std::abs(diff[order[i]])) ++j;
        const long doubled = static_cast<long>(i + 1 + j + 1);  // 2 * mean of ranks i+1..j+1
        for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = doubled;
        i = j + 1;
    }
    long observed = 0;
    long total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        total += rank2[i];
        if (diff[i] > 0.0) observed += rank2[i];
    }
    // Null distribution of the doubled positive-rank sum.
    std::vector<double> prob(static_cast<std::size_t>(total) + 1, 0.0);
    prob[0] = 1.0;
    long reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const long r = rank2[i];
        for (long s = reach; s >= 0; --s) {
            const double p = prob[static_cast<std::size_t>(s)] * 0.5;
            prob[static_cast<std::size_t>(s)] = p;
            prob[static_cast<std::size_t>(s + r)] += p;
        }
        reach += r;
    }
    double p_value = 0.0;
    for (long s = observed; s <= total; ++s) p_value += prob[static_cast<std::size_t>(s)];
    return std::min(1.0, p_value);
}

}  // namespace mddkm
