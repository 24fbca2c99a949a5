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

#include "mddkm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include "mddkm/error.hpp"

namespace mddkm {

using nlohmann::json;

const char* to_string(Algorithm algorithm) { return algorithm == Algorithm::MddKm ? "mddkm" : "pknn"; }

Algorithm algorithm_from_string(const std::string& name) {
    if (name == "mddkm") return Algorithm::MddKm;
    if (name == "pknn") return Algorithm::Pknn;
    throw InvalidInput("unknown algorithm '" + name + "' (expected mddkm or pknn)");
}

Split split_corpus(const Corpus& corpus, int per_class, std::uint64_t seed) {
    if (per_class < 1) throw InvalidInput("split: per-class training count must be positive");
    Split split;
    split.classes = corpus.training_classes;
    if (split.classes.empty()) throw InvalidInput("split: corpus has no training class");
    std::mt19937_64 rng(seed);
    std::set<std::size_t> picked;
    for (const auto& name : split.classes) {
        std::vector<std::size_t> idx = corpus.instances_of(name);
        if (idx.size() < static_cast<std::size_t>(per_class)) {
            throw InvalidInput("split: class '" + name + "' has " + std::to_string(idx.size()) +
                               " instances, need at least " + std::to_string(per_class));
        }
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(static_cast<std::size_t>(per_class));
        std::sort(idx.begin(), idx.end());
        picked.insert(idx.begin(), idx.end());
        split.train.push_back(std::move(idx));
    }
    for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
        if (!picked.count(i)) split.test.push_back(i);
    }
    std::shuffle(split.test.begin(), split.test.end(), rng);
    return split;
}

Clip build_clip(const Corpus& corpus, const std::vector<std::size_t>& order, const std::vector<std::string>& classes) {
    Clip clip;
    clip.truth.class_labels = classes;
    for (std::size_t i : order) {
        if (i >= corpus.instances.size()) throw InvalidInput("clip: instance index out of range");
        const auto& inst = corpus.instances[i];
        if (inst.end_sample > corpus.samples.size()) throw InvalidInput("clip: corpus samples are missing");
        const auto it = std::find(classes.begin(), classes.end(), inst.class_name);
        const Label label = it == classes.end() ? kOod : static_cast<Label>(it - classes.begin());
        const std::size_t start = clip.samples.size();
        clip.samples.insert(clip.samples.end(), corpus.samples.begin() + static_cast<std::ptrdiff_t>(inst.start_sample),
                            corpus.samples.begin() + static_cast<std::ptrdiff_t>(inst.end_sample));
        clip.truth.instances.push_back({start, clip.samples.size(), label, inst.class_name});
    }
    return clip;
}

std::vector<std::size_t> demo_order(const Corpus& corpus, const Split& split, const std::vector<int>& per_class,
                                    int ood, std::uint64_t seed) {
    if (per_class.size() != split.classes.size()) throw InvalidInput("demo clip: one count per training class needed");
    std::vector<std::size_t> order;
    std::vector<int> need = per_class;
    std::set<std::string> ood_classes;
    for (std::size_t i : split.test) {
        const std::string& name = corpus.instances[i].class_name;
        const auto it = std::find(split.classes.begin(), split.classes.end(), name);
        if (it != split.classes.end()) {
            int& n = need[static_cast<std::size_t>(it - split.classes.begin())];
            if (n > 0) {
                --n;
                order.push_back(i);
            }
        } else if (static_cast<int>(ood_classes.size()) < ood && ood_classes.insert(name).second) {
            order.push_back(i);
        }
    }
    if (std::any_of(need.begin(), need.end(), [](int n) { return n > 0; }) ||
        static_cast<int>(ood_classes.size()) < ood) {
        throw InvalidInput("demo clip: the test split does not hold enough instances");
    }
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

TrainingSet training_features(const FeatureExtractor& extractor, const Corpus& corpus, const Split& split,
                              int stride) {
    if (stride < 1) throw InvalidInput("training stride must be positive");
    TrainingSet set;
    set.labels = split.classes;
    for (const auto& picks : split.train) {
        std::vector<Eigen::MatrixXd> parts;
        Eigen::Index total = 0;
        for (std::size_t i : picks) {
            const auto& inst = corpus.instances[i];
            const std::span<const double> audio(corpus.samples.data() + inst.start_sample,
                                                inst.end_sample - inst.start_sample);
            const Eigen::MatrixXd z = extractor.extract(audio);
            Eigen::MatrixXd kept(z.rows(), (z.cols() + stride - 1) / stride);
            for (Eigen::Index t = 0, k = 0; t < z.cols(); t += stride, ++k) kept.col(k) = z.col(t);
            total += kept.cols();
            parts.push_back(std::move(kept));
        }
        Eigen::MatrixXd block(extractor.config().top_dim(), total);
        Eigen::Index offset = 0;
        for (const auto& p : parts) {
            block.middleCols(offset, p.cols()) = p;
            offset += p.cols();
        }
        set.blocks.push_back(std::move(block));
    }
    return set;
}

std::vector<std::string> Detector::labels() const {
    if (model) return model->labels();
    if (prototypes) return prototypes->labels();
    return {};
}

ScoreTrack Detector::raw_scores(const Eigen::MatrixXd& features, int hop, int window_len) const {
    ScoreTrack track;
    track.hop = hop;
    track.window_len = window_len;
    if (algorithm == Algorithm::MddKm) {
        if (!model) throw InvalidInput("detector has no MDD-KM model");
        track.scores = model->score_batch(features);
        track.semantics = ScoreSemantics::MddKmRaw;
    } else {
        if (!prototypes) throw InvalidInput("detector has no prototype set");
        track.scores = possibility_batch(*prototypes, features, neighbors);
        track.semantics = ScoreSemantics::HigherIsCloser;
    }
    return track;
}

ScoreTrack Detector::decision_scores(const ScoreTrack& raw, double floor) const {
    return raw.semantics == ScoreSemantics::MddKmRaw ? transform_scores(raw, floor) : raw;
}

Detector train_detector(Algorithm algorithm, const TrainingSet& fit, const TrainingSet& calibration,
                        const PipelineConfig& config, std::uint64_t seed) {
    Detector d;
    d.algorithm = algorithm;
    if (algorithm == Algorithm::MddKm) {
        OptimizerConfig oc;
        oc.mode = config.mddkm.mode;
        oc.sigma_reg = config.mddkm.sigma_reg;
        oc.cond_threshold = config.mddkm.cond_threshold;
        oc.ell_factors = config.mddkm.ell_factors;
        oc.sigma_factors = config.mddkm.sigma_factors;
        oc.bfgs.max_iterations = config.mddkm.max_iterations;
        oc.seed = seed;
        d.model = train(fit, oc);
    } else {
        SomConfig som;
        som.epochs_per_prototype = config.pknn.epochs_per_prototype;
        som.learning_rate_start = config.pknn.learning_rate_start;
        som.learning_rate_end = config.pknn.learning_rate_end;
        som.radius_end = config.pknn.radius_end;
        som.seed = seed;
        d.prototypes = train_prototypes(fit, config.pknn.prototypes, som);
        d.neighbors = static_cast<int>(std::min<Eigen::Index>(config.pknn.neighbors, d.prototypes->total_prototypes()));
    }
    const ScoreTrack calib =
        d.decision_scores(d.raw_scores(calibration.concatenated(), config.hlds.hop(), config.hlds.window_len),
                          config.decision.transform_floor);
    d.tau = compute_tau(calib, algorithm == Algorithm::MddKm ? TauMethod::MddKm : TauMethod::Pknn,
                        config.decision.mddkm_tau_numerator, config.decision.pknn_tau);
    return d;
}

SeedOutcome run_seed(const Corpus& corpus, const FeatureExtractor& extractor, const PipelineConfig& config,
                     std::uint64_t seed, const std::vector<Algorithm>& algorithms) {
    const Split split = split_corpus(corpus, config.experiment.train_per_class, seed);
    const Clip clip = build_clip(corpus, split.test, split.classes);
    const Eigen::MatrixXd features = extractor.extract(clip.samples);
    const TrainingSet calibration = training_features(extractor, corpus, split, 1);
    const int hop = config.hlds.hop();
    const int window_len = config.hlds.window_len;
    const std::vector<Label> truth_windows = clip.truth.window_labels(window_len, config.hlds.overlap);

    SeedOutcome out;
    out.seed = seed;
    for (Algorithm a : algorithms) {
        const int stride = a == Algorithm::MddKm ? config.mddkm.train_stride : config.pknn.train_stride;
        const TrainingSet fit = stride == 1 ? calibration : training_features(extractor, corpus, split, stride);
        const Detector det = train_detector(a, fit, calibration, config, seed);
        const ScoreTrack track = det.decision_scores(det.raw_scores(features, hop, window_len),
                                                     config.decision.transform_floor);
        DecisionConfig dc{det.tau, config.decision.min_note_len, config.decision.dominance_len};
        AlgorithmOutcome o;
        o.algorithm = a;
        o.tau = det.tau;
        o.segments = decide(track, dc);
        o.window = confusion_windows(labels_from_segments(o.segments), truth_windows, split.classes, seed);
        o.note = confusion_notes(o.segments, clip.truth, window_len, config.hlds.overlap, seed);
        out.algorithms.push_back(std::move(o));
    }
    return out;
}

namespace {

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

json summarize(const std::vector<std::string>& classes, const std::vector<SeedOutcome>& seeds,
               const std::vector<Algorithm>& algorithms, const std::string& config_hash) {
    json summary;
    summary["config_hash"] = config_hash;
    summary["classes"] = classes;
    std::vector<std::uint64_t> seed_list;
    for (const auto& s : seeds) seed_list.push_back(s.seed);
    summary["seeds"] = seed_list;

    json units = json::object();
    for (EvalUnit unit : {EvalUnit::Window, EvalUnit::Note}) {
        json u = json::object();
        std::vector<std::string> cats = classes;
        if (unit == EvalUnit::Window) cats.push_back("OOD");
        std::vector<std::vector<double>> macro_by_alg;
        for (std::size_t a = 0; a < algorithms.size(); ++a) {
            std::vector<double> macro;
            std::vector<std::vector<double>> per_class(cats.size());
            for (const auto& s : seeds) {
                const EvalReport& r = unit == EvalUnit::Window ? s.algorithms[a].window : s.algorithms[a].note;
                macro.push_back(r.macro_f);
                for (std::size_t k = 0; k < cats.size(); ++k) {
                    per_class[k].push_back(r.f_scores(static_cast<Eigen::Index>(k)));
                }
            }
            json pc = json::object();
            for (std::size_t k = 0; k < cats.size(); ++k) pc[cats[k]] = mean(per_class[k]);
            u[to_string(algorithms[a])] = json{{"per_class", pc}, {"overall", mean(macro)}, {"per_seed_macro", macro}};
            macro_by_alg.push_back(std::move(macro));
        }
        const auto m = std::find(algorithms.begin(), algorithms.end(), Algorithm::MddKm);
        const auto p = std::find(algorithms.begin(), algorithms.end(), Algorithm::Pknn);
        if (m != algorithms.end() && p != algorithms.end() && seeds.size() >= 5) {
            u["p_value"] = wilcoxon_signed_rank_greater(macro_by_alg[static_cast<std::size_t>(m - algorithms.begin())],
                                                        macro_by_alg[static_cast<std::size_t>(p - algorithms.begin())]);
        } else {
            u["p_value"] = nullptr;
        }
        units[to_string(unit)] = std::move(u);
    }
    summary["units"] = std::move(units);

    json ood = json::object();
    for (std::size_t a = 0; a < algorithms.size(); ++a) {
        std::vector<long> counts;
        long clean = 0;
        for (const auto& s : seeds) {
            counts.push_back(s.algorithms[a].note.ood_to_class());
            if (counts.back() == 0) ++clean;
        }
        ood[to_string(algorithms[a])] = json{{"per_seed", counts}, {"seeds_without_ood_errors", clean}};
    }
    summary["note_ood_to_class"] = std::move(ood);
    return summary;
}

}  // namespace

ExperimentResult run_experiment(const Corpus& corpus, const PipelineConfig& config,
                                const std::vector<std::uint64_t>& seeds, const std::vector<Algorithm>& algorithms) {
    config.validate();
    corpus.validate();
    if (seeds.empty()) throw InvalidInput("experiment: no seeds");
    if (algorithms.empty()) throw InvalidInput("experiment: no algorithms");
    const FeatureExtractor extractor(config.hlds);

    ExperimentResult result;
    result.classes = corpus.training_classes;
    result.seeds.resize(seeds.size());
    unsigned threads = config.experiment.threads > 0 ? static_cast<unsigned>(config.experiment.threads)
                                                     : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(seeds.size()));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            try {
                result.seeds[i] = run_seed(corpus, extractor, config, seeds[i], algorithms);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = seeds.size();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    result.summary = summarize(result.classes, result.seeds, algorithms, config_hash(config));
    return result;
}

std::string format_summary(const json& summary) {
    std::string out;
    char buf[64];
    const auto classes = summary.at("classes").get<std::vector<std::string>>();
    out += "unit    algorithm";
    for (const auto& c : classes) {
        std::snprintf(buf, sizeof buf, " %10s", c.c_str());
        out += buf;
    }
    out += "        OOD    overall  p-value\n";
    for (const char* unit : {"window", "note"}) {
        const json& u = summary.at("units").at(unit);
        for (auto it = u.begin(); it != u.end(); ++it) {
            if (it.key() == "p_value") continue;
            std::snprintf(buf, sizeof buf, "%-7s %-9s", unit, it.key().c_str());
            out += buf;
            const json& pc = it->at("per_class");
            for (const auto& c : classes) {
                std::snprintf(buf, sizeof buf, " %10.3f", pc.at(c).get<double>());
                out += buf;
            }
            if (pc.contains("OOD")) {
                std::snprintf(buf, sizeof buf, " %10.3f", pc.at("OOD").get<double>());
            } else {
                std::snprintf(buf, sizeof buf, " %10s", "-");
            }
            out += buf;
            std::snprintf(buf, sizeof buf, " %10.3f", it->at("overall").get<double>());
            out += buf;
            if (it.key() == "mddkm" && !u.at("p_value").is_null()) {
                std::snprintf(buf, sizeof buf, "  %.3g", u.at("p_value").get<double>());
                out += buf;
            }
            out += '\n';
        }
    }
    return out;
}

}  // namespace mddkm
