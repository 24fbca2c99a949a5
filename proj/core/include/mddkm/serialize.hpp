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

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "mddkm/model.hpp"
#include "mddkm/pknn.hpp"

namespace mddkm {

inline constexpr int kModelSchemaVersion = 1;

/// Fields stored next to a trained model that are not part of the model itself.
struct ArtifactInfo {
    std::string config_hash;
    /// Decision threshold fixed at training time.
    double tau = 0.0;
    /// Neighbor count for prototype scoring (prototype artifacts only).
    int neighbors = 0;
};

/// Matrices are stored as {"rows", "cols", "data"} with data in row-major order.
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const MddKmModel& model, const ArtifactInfo& info = {});
/// Throws SchemaError on a missing field, wrong kind, or unsupported schema version,
/// and InvalidInput on inconsistent shapes.
MddKmModel model_from_json(const nlohmann::json& doc, ArtifactInfo* info = nullptr);

nlohmann::json prototypes_to_json(const PrototypeSet& set, const ArtifactInfo& info = {});
PrototypeSet prototypes_from_json(const nlohmann::json& doc, ArtifactInfo* info = nullptr);

/// "mddkm" or "pknn", read from the artifact's kind field.
std::string artifact_kind(const nlohmann::json& doc);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace mddkm
