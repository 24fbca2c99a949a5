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

#include "mddkm/config.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "mddkm/error.hpp"

namespace mddkm {

using nlohmann::json;

PipelineConfig::PipelineConfig() {
    // Plain cosine sums put the features on the scale the fixed threshold expects.
    hlds.dct = DctNormalization::Unnormalized;
    experiment.seeds.resize(50);
    std::iota(experiment.seeds.begin(), experiment.seeds.end(), std::uint64_t{1});
}

void PipelineConfig::validate() const {
    hlds.validate();
    corpus.validate();
    if (corpus.window_len != hlds.window_len || corpus.overlap != hlds.overlap) {
        throw InvalidInput("corpus window settings must match the HLDS window settings");
    }
    if (!(mddkm.cond_threshold > 1.0)) throw InvalidInput("mddkm.cond_threshold must exceed 1");
    if (mddkm.ell_factors.empty() || mddkm.sigma_factors.empty()) {
        throw InvalidInput("mddkm start factors must be nonempty");
    }
    for (double f : mddkm.ell_factors) {
        if (!(f > 0.0)) throw InvalidInput("mddkm.ell_factors must be positive");
    }
    for (double f : mddkm.sigma_factors) {
        if (!(f > 0.0)) throw InvalidInput("mddkm.sigma_factors must be positive");
    }
    if (mddkm.max_iterations < 1 || mddkm.train_stride < 1) {
        throw InvalidInput("mddkm.max_iterations and mddkm.train_stride must be positive");
    }
    if (pknn.prototypes < 1 || pknn.neighbors < 1 || pknn.epochs_per_prototype < 1 || pknn.train_stride < 1) {
        throw InvalidInput("pknn counts must be positive");
    }
    if (decision.min_note_len < 1 || decision.dominance_len < decision.min_note_len) {
        throw InvalidInput("decision lengths must satisfy 1 <= min_note_len <= dominance_len");
    }
    if (!(decision.mddkm_tau_numerator > 0.0) || !(decision.pknn_tau >= 0.0) || !(decision.transform_floor > 0.0)) {
        throw InvalidInput("decision thresholds must be positive");
    }
    if (experiment.train_per_class < 1) throw InvalidInput("experiment.train_per_class must be positive");
    if (experiment.threads < 0) throw InvalidInput("experiment.threads must be nonnegative");
}

namespace {

json class_to_json(const NoteClassSpec& c) {
    return json{{"name", c.name},
                {"count", c.count},
                {"min_windows", c.min_windows},
                {"max_windows", c.max_windows},
                {"harmonics_hz", c.harmonics_hz},
                {"harmonic_amps", c.harmonic_amps},
                {"am_rate_hz", c.am_rate_hz},
                {"am_depth", c.am_depth},
                {"fm_rate_hz", c.fm_rate_hz},
                {"fm_depth", c.fm_depth},
                {"sweep", c.sweep},
                {"training", c.training}};
}

// Pulls known keys out of an object; anything left over is an error.
class StrictReader {
public:
    StrictReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw SchemaError("config: '" + path_ + "' must be an object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        seen_.insert(key);
        try {
            out = it->template get<T>();
        } catch (const json::exception& e) {
            throw SchemaError("config: '" + path_ + "." + key + "' has the wrong type: " + e.what());
        }
    }

    const json* child(const char* key) {
        auto it = obj_.find(key);
        if (it == obj_.end()) return nullptr;
        seen_.insert(key);
        return &*it;
    }

    std::string path(const char* key) const { return path_ + "." + key; }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) throw SchemaError("config: unknown key '" + path_ + "." + it.key() + "'");
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

NoteClassSpec class_from_json(const json& j, const std::string& path) {
    NoteClassSpec c;
    StrictReader r(j, path);
    r.read("name", c.name);
    r.read("count", c.count);
    r.read("min_windows", c.min_windows);
    r.read("max_windows", c.max_windows);
    r.read("harmonics_hz", c.harmonics_hz);
    r.read("harmonic_amps", c.harmonic_amps);
    r.read("am_rate_hz", c.am_rate_hz);
    r.read("am_depth", c.am_depth);
    r.read("fm_rate_hz", c.fm_rate_hz);
    r.read("fm_depth", c.fm_depth);
    r.read("sweep", c.sweep);
    r.read("training", c.training);
    r.finish();
    return c;
}

}  // namespace

json to_json(const PipelineConfig& c) {
    json classes = json::array();
    for (const auto& nc : c.corpus.classes) classes.push_back(class_to_json(nc));
    return json{
        {"hlds",
         {{"layer_dims", c.hlds.layer_dims},
          {"window_len", c.hlds.window_len},
          {"overlap", c.hlds.overlap},
          {"innovation_scale", c.hlds.innovation_scale},
          {"observation_scale", c.hlds.observation_scale},
          {"initial_cov", c.hlds.initial_cov},
          {"dct", to_string(c.hlds.dct)}}},
        {"mddkm",
         {{"regularization", to_string(c.mddkm.mode)},
          {"sigma_reg", c.mddkm.sigma_reg == SigmaRegHandling::Fixed ? "fixed" : "optimize"},
          {"cond_threshold", c.mddkm.cond_threshold},
          {"ell_factors", c.mddkm.ell_factors},
          {"sigma_factors", c.mddkm.sigma_factors},
          {"max_iterations", c.mddkm.max_iterations},
          {"train_stride", c.mddkm.train_stride}}},
        {"pknn",
         {{"prototypes", c.pknn.prototypes},
          {"neighbors", c.pknn.neighbors},
          {"epochs_per_prototype", c.pknn.epochs_per_prototype},
          {"learning_rate_start", c.pknn.learning_rate_start},
          {"learning_rate_end", c.pknn.learning_rate_end},
          {"radius_end", c.pknn.radius_end},
          {"train_stride", c.pknn.train_stride}}},
        {"decision",
         {{"min_note_len", c.decision.min_note_len},
          {"dominance_len", c.decision.dominance_len},
          {"mddkm_tau_numerator", c.decision.mddkm_tau_numerator},
          {"pknn_tau", c.decision.pknn_tau},
          {"transform_floor", c.decision.transform_floor}}},
        {"experiment",
         {{"train_per_class", c.experiment.train_per_class},
          {"seeds", c.experiment.seeds},
          {"corpus_seed", c.experiment.corpus_seed},
          {"threads", c.experiment.threads}}},
        {"corpus",
         {{"classes", classes},
          {"sample_rate", c.corpus.sample_rate},
          {"window_len", c.corpus.window_len},
          {"overlap", c.corpus.overlap},
          {"amplitude", c.corpus.amplitude},
          {"noise_floor", c.corpus.noise_floor},
          {"frequency_jitter", c.corpus.frequency_jitter},
          {"amplitude_jitter", c.corpus.amplitude_jitter},
          {"ramp_ms", c.corpus.ramp_ms}}},
        {"seed", c.seed},
    };
}

PipelineConfig config_from_json(const json& doc) {
    PipelineConfig c;
    StrictReader top(doc, "config");
    if (const json* j = top.child("hlds")) {
        StrictReader r(*j, top.path("hlds"));
        r.read("layer_dims", c.hlds.layer_dims);
        r.read("window_len", c.hlds.window_len);
        r.read("overlap", c.hlds.overlap);
        r.read("innovation_scale", c.hlds.innovation_scale);
        r.read("observation_scale", c.hlds.observation_scale);
        r.read("initial_cov", c.hlds.initial_cov);
        std::string dct = to_string(c.hlds.dct);
        r.read("dct", dct);
        r.finish();
        try {
            c.hlds.dct = dct_normalization_from_string(dct);
        } catch (const InvalidInput& e) {
            throw SchemaError(std::string("config: hlds.dct: ") + e.what());
        }
    }
    if (const json* j = top.child("mddkm")) {
        StrictReader r(*j, top.path("mddkm"));
        std::string mode = to_string(c.mddkm.mode);
        std::string handling = c.mddkm.sigma_reg == SigmaRegHandling::Fixed ? "fixed" : "optimize";
        r.read("regularization", mode);
        r.read("sigma_reg", handling);
        r.read("cond_threshold", c.mddkm.cond_threshold);
        r.read("ell_factors", c.mddkm.ell_factors);
        r.read("sigma_factors", c.mddkm.sigma_factors);
        r.read("max_iterations", c.mddkm.max_iterations);
        r.read("train_stride", c.mddkm.train_stride);
        r.finish();
        try {
            c.mddkm.mode = regularization_mode_from_string(mode);
        } catch (const InvalidInput& e) {
            throw SchemaError(std::string("config: mddkm.regularization: ") + e.what());
        }
        if (handling == "fixed") {
            c.mddkm.sigma_reg = SigmaRegHandling::Fixed;
        } else if (handling == "optimize") {
            c.mddkm.sigma_reg = SigmaRegHandling::CoOptimize;
        } else {
            throw SchemaError("config: mddkm.sigma_reg must be 'fixed' or 'optimize'");
        }
    }
    if (const json* j = top.child("pknn")) {
        StrictReader r(*j, top.path("pknn"));
        r.read("prototypes", c.pknn.prototypes);
        r.read("neighbors", c.pknn.neighbors);
        r.read("epochs_per_prototype", c.pknn.epochs_per_prototype);
        r.read("learning_rate_start", c.pknn.learning_rate_start);
        r.read("learning_rate_end", c.pknn.learning_rate_end);
        r.read("radius_end", c.pknn.radius_end);
        r.read("train_stride", c.pknn.train_stride);
        r.finish();
    }
    if (const json* j = top.child("decision")) {
        StrictReader r(*j, top.path("decision"));
        r.read("min_note_len", c.decision.min_note_len);
        r.read("dominance_len", c.decision.dominance_len);
        r.read("mddkm_tau_numerator", c.decision.mddkm_tau_numerator);
        r.read("pknn_tau", c.decision.pknn_tau);
        r.read("transform_floor", c.decision.transform_floor);
        r.finish();
    }
    if (const json* j = top.child("experiment")) {
        StrictReader r(*j, top.path("experiment"));
        r.read("train_per_class", c.experiment.train_per_class);
        r.read("seeds", c.experiment.seeds);
        r.read("corpus_seed", c.experiment.corpus_seed);
        r.read("threads", c.experiment.threads);
        r.finish();
    }
    if (const json* j = top.child("corpus")) {
        StrictReader r(*j, top.path("corpus"));
        if (const json* classes = r.child("classes")) {
            if (!classes->is_array()) throw SchemaError("config: corpus.classes must be an array");
            c.corpus.classes.clear();
            for (std::size_t i = 0; i < classes->size(); ++i) {
                c.corpus.classes.push_back(
                    class_from_json((*classes)[i], "config.corpus.classes[" + std::to_string(i) + "]"));
            }
        }
        r.read("sample_rate", c.corpus.sample_rate);
        r.read("window_len", c.corpus.window_len);
        r.read("overlap", c.corpus.overlap);
        r.read("amplitude", c.corpus.amplitude);
        r.read("noise_floor", c.corpus.noise_floor);
        r.read("frequency_jitter", c.corpus.frequency_jitter);
        r.read("amplitude_jitter", c.corpus.amplitude_jitter);
        r.read("ramp_ms", c.corpus.ramp_ms);
        r.finish();
    }
    top.read("seed", c.seed);
    top.finish();
    try {
        c.validate();
    } catch (const InvalidInput& e) {
        throw SchemaError(std::string("config: ") + e.what());
    }
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(doc);
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_hash(const PipelineConfig& config) { return fnv1a_hex(to_json(config).dump()); }

}  // namespace mddkm
