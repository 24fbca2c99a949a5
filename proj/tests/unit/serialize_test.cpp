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

#include <filesystem>
#include <fstream>
#include <random>

#include "mddkm/error.hpp"
#include "mddkm/serialize.hpp"
#include "oracles.hpp"

namespace mddkm {
namespace {

using testing::random_matrix;

TrainingSet small_set(std::mt19937_64& rng) {
    TrainingSet s;
    s.labels = {"a", "b"};
    s.blocks = {random_matrix(rng, 4, 9), random_matrix(rng, 4, 7).array() + 2.0};
    return s;
}

MddKmModel small_model(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    OptimizerConfig cfg;
    cfg.mode = RegularizationMode::Nugget;
    cfg.bfgs.max_iterations = 30;
    return train(small_set(rng), cfg);
}

TEST(Matrix, JsonRoundTripIsExact) {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd m = random_matrix(rng, 3, 5) * 1e-7;
    const nlohmann::json j = matrix_to_json(m);
    EXPECT_EQ(j.at("rows"), 3);
    EXPECT_EQ(j.at("cols"), 5);
    EXPECT_EQ(j.at("data")[1].get<double>(), m(0, 1));  // row-major
    EXPECT_TRUE((matrix_from_json(j).array() == m.array()).all());

    nlohmann::json bad = j;
    bad["data"].erase(0);
    EXPECT_THROW(matrix_from_json(bad), SchemaError);
}

TEST(Model, RoundTripScoresMatch) {
    const MddKmModel model = small_model(2);
    ArtifactInfo info;
    info.config_hash = "0123456789abcdef";
    info.tau = 0.125;
    const auto path = std::filesystem::temp_directory_path() / "mddkm_model_roundtrip.json";
    write_json_file(path, model_to_json(model, info));
    ArtifactInfo back_info;
    const MddKmModel back = model_from_json(read_json_file(path), &back_info);
    std::filesystem::remove(path);

    EXPECT_EQ(back_info.config_hash, info.config_hash);
    EXPECT_EQ(back_info.tau, info.tau);
    EXPECT_EQ(back.labels(), model.labels());
    EXPECT_EQ(back.mode(), model.mode());
    EXPECT_EQ(back.params().sigma, model.params().sigma);
    EXPECT_EQ(back.params().ell, model.params().ell);
    EXPECT_EQ(back.params().sigma_reg, model.params().sigma_reg);

    std::mt19937_64 rng(3);
    const Eigen::MatrixXd probes = random_matrix(rng, 4, 50, 2.0);
    EXPECT_LT((back.score_batch(probes) - model.score_batch(probes)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Model, SchemaViolations) {
    const nlohmann::json doc = model_to_json(small_model(4));
    EXPECT_EQ(artifact_kind(doc), "mddkm");

    nlohmann::json v = doc;
    v["schema_version"] = kModelSchemaVersion + 1;
    EXPECT_THROW(model_from_json(v), SchemaError);

    nlohmann::json missing = doc;
    missing.erase("classes");
    EXPECT_THROW(model_from_json(missing), SchemaError);

    nlohmann::json typed = doc;
    typed["kind"] = 3;
    EXPECT_THROW(model_from_json(typed), SchemaError);

    EXPECT_THROW(prototypes_from_json(doc), SchemaError);
}

TEST(Prototypes, RoundTripPossibilitiesMatch) {
    std::mt19937_64 rng(5);
    const PrototypeSet set = train_prototypes(small_set(rng), 2, SomConfig{.epochs_per_prototype = 20});
    ArtifactInfo info;
    info.neighbors = 3;
    const nlohmann::json doc = prototypes_to_json(set, info);
    EXPECT_EQ(artifact_kind(doc), "pknn");
    ArtifactInfo back_info;
    const PrototypeSet back = prototypes_from_json(nlohmann::json::parse(doc.dump()), &back_info);
    EXPECT_EQ(back_info.neighbors, 3);
    EXPECT_EQ(back.labels(), set.labels());
    const Eigen::MatrixXd probes = random_matrix(rng, 4, 30, 2.0);
    EXPECT_LT((possibility_batch(back, probes, 3) - possibility_batch(set, probes, 3)).cwiseAbs().maxCoeff(),
              1e-12);
    EXPECT_THROW(model_from_json(doc), SchemaError);
}

TEST(JsonFile, MissingAndMalformed) {
    EXPECT_THROW(read_json_file("/nonexistent/dir/x.json"), IoError);
    const auto path = std::filesystem::temp_directory_path() / "mddkm_bad.json";
    { std::ofstream(path) << "{ not json"; }
    EXPECT_THROW(read_json_file(path), SchemaError);
    std::filesystem::remove(path);
}

}  // namespace
}  // namespace mddkm
