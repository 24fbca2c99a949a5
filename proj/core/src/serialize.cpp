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

#include "mddkm/serialize.hpp"

#include <fstream>

#include "mddkm/error.hpp"

namespace mddkm {

using nlohmann::json;

namespace {

constexpr const char* kModelKind = "mddkm";
constexpr const char* kPrototypeKind = "pknn";

const json& field(const json& obj, const char* key) {
    if (!obj.is_object()) throw SchemaError("artifact: expected an object around field '" + std::string(key) + "'");
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(std::string("artifact: missing field '") + key + "'");
    return *it;
}

template <typename T>
T get(const json& obj, const char* key) {
    try {
        return field(obj, key).get<T>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("artifact: field '") + key + "' has the wrong type: " + e.what());
    }
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j) {
    std::vector<double> v;
    try {
        v = j.get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("artifact: expected a numeric array: ") + e.what());
    }
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json params_to_json(const KernelParams& p) {
    return json{{"sigma", p.sigma}, {"ell", p.ell}, {"sigma_reg", p.sigma_reg}};
}

KernelParams params_from_json(const json& j) {
    return KernelParams{get<double>(j, "sigma"), get<double>(j, "ell"), get<double>(j, "sigma_reg")};
}

void check_header(const json& doc, const char* kind) {
    const int version = get<int>(doc, "schema_version");
    if (version != kModelSchemaVersion) {
        throw SchemaError("artifact: unsupported schema_version " + std::to_string(version));
    }
    const std::string found = get<std::string>(doc, "kind");
    if (found != kind) throw SchemaError("artifact: expected kind '" + std::string(kind) + "', found '" + found + "'");
}

json header(const char* kind, const ArtifactInfo& info) {
    json doc;
    doc["schema_version"] = kModelSchemaVersion;
    doc["kind"] = kind;
    doc["config_hash"] = info.config_hash;
    doc["tau"] = info.tau;
    return doc;
}

void read_info(const json& doc, ArtifactInfo* info) {
    if (!info) return;
    info->config_hash = get<std::string>(doc, "config_hash");
    info->tau = get<double>(doc, "tau");
    auto it = doc.find("neighbors");
    info->neighbors = it == doc.end() ? 0 : get<int>(doc, "neighbors");
}

}  // namespace

json matrix_to_json(const Eigen::MatrixXd& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = get<Eigen::Index>(j, "rows");
    const auto cols = get<Eigen::Index>(j, "cols");
    const auto data = get<std::vector<double>>(j, "data");
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
        throw SchemaError("artifact: matrix data length does not match its shape");
    }
    Eigen::MatrixXd m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[k++];
    }
    return m;
}

json model_to_json(const MddKmModel& model, const ArtifactInfo& info) {
    json doc = header(kModelKind, info);
    doc["params"] = params_to_json(model.params());
    doc["regularization"] = to_string(model.mode());
    json classes = json::array();
    for (const auto& c : model.classes()) {
        classes.push_back(json{{"label", c.label}, {"X", matrix_to_json(c.X)}, {"factor", matrix_to_json(c.factor)}});
    }
    doc["classes"] = std::move(classes);

    const auto& meta = model.metadata();
    json starts = json::array();
    for (const auto& s : meta.starts) {
        starts.push_back(json{{"initial", params_to_json(s.initial)},
                              {"final", params_to_json(s.final)},
                              {"initial_cost", s.initial_cost},
                              {"final_cost", s.final_cost},
                              {"iterations", s.iterations},
                              {"feasible", s.feasible},
                              {"converged", s.converged},
                              {"note", s.note}});
    }
    doc["metadata"] = json{{"seed", meta.seed},
                           {"final_cost", meta.final_cost},
                           {"median_distance", meta.median_distance},
                           {"target_std", meta.target_std},
                           {"starts", std::move(starts)}};
    return doc;
}

MddKmModel model_from_json(const json& doc, ArtifactInfo* info) {
    check_header(doc, kModelKind);
    read_info(doc, info);
    const KernelParams params = params_from_json(field(doc, "params"));
    RegularizationMode mode;
    try {
        mode = regularization_mode_from_string(get<std::string>(doc, "regularization"));
    } catch (const InvalidInput& e) {
        throw SchemaError(std::string("artifact: ") + e.what());
    }
    const json& classes = field(doc, "classes");
    if (!classes.is_array()) throw SchemaError("artifact: 'classes' must be an array");
    std::vector<ClassBlock> blocks;
    for (const auto& c : classes) {
        blocks.push_back({get<std::string>(c, "label"), matrix_from_json(field(c, "X")),
                          matrix_from_json(field(c, "factor"))});
    }
    TrainingMetadata meta;
    if (auto it = doc.find("metadata"); it != doc.end()) {
        const json& m = *it;
        meta.seed = get<std::uint64_t>(m, "seed");
        meta.final_cost = get<double>(m, "final_cost");
        meta.median_distance = get<double>(m, "median_distance");
        meta.target_std = get<double>(m, "target_std");
        for (const auto& s : field(m, "starts")) {
            StartRecord r;
            r.initial = params_from_json(field(s, "initial"));
            r.final = params_from_json(field(s, "final"));
            r.initial_cost = get<double>(s, "initial_cost");
            r.final_cost = get<double>(s, "final_cost");
            r.iterations = get<int>(s, "iterations");
            r.feasible = get<bool>(s, "feasible");
            r.converged = get<bool>(s, "converged");
            r.note = get<std::string>(s, "note");
            meta.starts.push_back(std::move(r));
        }
    }
    return MddKmModel(params, mode, std::move(blocks), std::move(meta));
}

json prototypes_to_json(const PrototypeSet& set, const ArtifactInfo& info) {
    json doc = header(kPrototypeKind, info);
    doc["neighbors"] = info.neighbors;
    json classes = json::array();
    for (const auto& c : set.classes) {
        classes.push_back(json{{"label", c.label},
                               {"prototypes", matrix_to_json(c.prototypes)},
                               {"weights", vector_to_json(c.weights)},
                               {"scales", vector_to_json(c.scales)}});
    }
    doc["classes"] = std::move(classes);
    return doc;
}

PrototypeSet prototypes_from_json(const json& doc, ArtifactInfo* info) {
    check_header(doc, kPrototypeKind);
    read_info(doc, info);
    const json& classes = field(doc, "classes");
    if (!classes.is_array()) throw SchemaError("artifact: 'classes' must be an array");
    PrototypeSet set;
    for (const auto& c : classes) {
        set.classes.push_back({get<std::string>(c, "label"), matrix_from_json(field(c, "prototypes")),
                               vector_from_json(field(c, "weights")), vector_from_json(field(c, "scales"))});
    }
    set.validate();
    return set;
}

std::string artifact_kind(const json& doc) { return get<std::string>(doc, "kind"); }

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(path.string() + " is not valid JSON: " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace mddkm
