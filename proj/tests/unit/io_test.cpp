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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "mddkm/audio.hpp"
#include "mddkm/error.hpp"
#include "mddkm/io.hpp"

namespace mddkm {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("mddkm_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

TEST(FormatDouble, ShortestRoundTrip) {
    std::mt19937_64 rng(91);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
    EXPECT_EQ(format_double(0.5), "0.5");
    EXPECT_EQ(format_double(3.0), "3");
}

using CsvTest = TempDir;

TEST_F(CsvTest, RoundTripWithMetadata) {
    CsvTable t;
    t.meta = {{"artifact", "demo"}, {"hop", "48"}};
    t.header = {"x", "y"};
    t.rows = {{"1", "2.5"}, {"3", "-4"}};
    write_csv(dir_ / "t.csv", t);
    const CsvTable r = read_csv(dir_ / "t.csv");
    EXPECT_EQ(r.meta, t.meta);
    EXPECT_EQ(r.header, t.header);
    EXPECT_EQ(r.rows, t.rows);
    EXPECT_EQ(r.column("y"), 1U);
    EXPECT_THROW(r.column("z"), SchemaError);
}

TEST_F(CsvTest, RejectsSeparatorsAndRaggedRows) {
    CsvTable t;
    t.header = {"a"};
    t.rows = {{"1,2"}};
    EXPECT_THROW(write_csv(dir_ / "bad.csv", t), InvalidInput);
    std::ofstream(dir_ / "ragged.csv") << "a,b\n1\n";
    EXPECT_THROW(read_csv(dir_ / "ragged.csv"), SchemaError);
    EXPECT_THROW(read_csv(dir_ / "missing.csv"), IoError);
}

TEST_F(CsvTest, ScoreTableRoundTrip) {
    ScoreTrack raw;
    raw.semantics = ScoreSemantics::MddKmRaw;
    raw.scores = Eigen::MatrixXd::Random(7, 3).cwiseAbs();
    const ScoreTrack tr = transform_scores(raw);
    write_csv(dir_ / "s.csv", score_table(raw, tr, {"a", "b", "c"}, {{"tau", "0.25"}}));
    const CsvTable table = read_csv(dir_ / "s.csv");
    EXPECT_EQ(table.rows.size(), 7U);
    EXPECT_EQ(table.rows[3][1], "144");  // start_sample = window * hop
    const ScoreFile f = scores_from_table(table);
    EXPECT_EQ(f.labels, (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_TRUE((f.raw.scores.array() == raw.scores.array()).all());
    EXPECT_TRUE((f.transformed.scores.array() == tr.scores.array()).all());
    EXPECT_EQ(f.raw.semantics, ScoreSemantics::MddKmRaw);
    EXPECT_EQ(f.meta.at("tau"), "0.25");
}

TEST_F(CsvTest, SegmentTableRoundTrip) {
    const std::vector<DecisionSegment> segs{{0, 9, kOod}, {10, 49, 1}, {50, 59, 0}};
    const CsvTable t = segment_table(segs, {"a", "b"}, 48, 96, {});
    ASSERT_EQ(t.rows.size(), 3U);
    EXPECT_EQ(t.rows[1][0], "480");
    EXPECT_EQ(t.rows[1][1], std::to_string(49 * 48 + 96));
    EXPECT_EQ(t.rows[1][4], "b");
    EXPECT_EQ(t.rows[0][4], "OOD");
    write_csv(dir_ / "g.csv", t);
    EXPECT_EQ(segments_from_table(read_csv(dir_ / "g.csv"), {"a", "b"}), segs);
    EXPECT_THROW(segments_from_table(t, {"a"}), InvalidInput);
}

TEST_F(CsvTest, TruthAndManifestRoundTrip) {
    GroundTruth g;
    g.class_labels = {"a", "b"};
    g.instances = {{0, 100, 0, "a"}, {100, 250, kOod, "z"}, {250, 300, 1, "b"}};
    write_csv(dir_ / "truth.csv", truth_table(g, {}));
    const GroundTruth r = truth_from_table(read_csv(dir_ / "truth.csv"), g.class_labels);
    ASSERT_EQ(r.instances.size(), 3U);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(r.instances[i].start_sample, g.instances[i].start_sample);
        EXPECT_EQ(r.instances[i].end_sample, g.instances[i].end_sample);
        EXPECT_EQ(r.instances[i].label, g.instances[i].label);
        EXPECT_EQ(r.instances[i].source_class, g.instances[i].source_class);
    }

    Corpus c;
    c.class_names = {"a", "b", "z"};
    c.training_classes = {"a", "b"};
    c.instances = {{"a", 0, 10}, {"z", 10, 30}, {"b", 30, 35}};
    write_csv(dir_ / "manifest.csv", manifest_table(c, {}));
    const Corpus m = corpus_from_manifest(read_csv(dir_ / "manifest.csv"));
    EXPECT_EQ(m.sample_rate, c.sample_rate);
    EXPECT_EQ(m.training_classes, c.training_classes);
    ASSERT_EQ(m.instances.size(), 3U);
    EXPECT_EQ(m.instances[1].class_name, "z");
    EXPECT_EQ(m.instances[2].end_sample, 35U);
    EXPECT_TRUE(m.samples.empty());
}

TEST_F(CsvTest, FeatureTableLayout) {
    const Eigen::MatrixXd z = Eigen::MatrixXd::Random(4, 6);
    const CsvTable t = feature_table(z, 48, {});
    ASSERT_EQ(t.header.size(), 5U);
    ASSERT_EQ(t.rows.size(), 6U);
    EXPECT_EQ(t.rows[2][0], "96");
    EXPECT_EQ(std::stod(t.rows[5][4]), z(3, 5));
}

using WavTest = TempDir;

TEST_F(WavTest, Pcm16RoundTripIsQuantization) {
    std::mt19937_64 rng(92);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    Audio a;
    a.sample_rate = 22050;
    for (int i = 0; i < 1000; ++i) a.samples.push_back(u(rng));
    write_wav_pcm16(dir_ / "a.wav", a);
    const Audio r = read_wav(dir_ / "a.wav");
    EXPECT_EQ(r.sample_rate, 22050);
    ASSERT_EQ(r.samples.size(), a.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        EXPECT_EQ(r.samples[i], quantize_pcm16(a.samples[i]));
        EXPECT_LE(std::abs(r.samples[i]), 1.0);
    }
    EXPECT_EQ(quantize_pcm16(quantize_pcm16(0.123)), quantize_pcm16(0.123));
}

void put32(std::ofstream& o, std::uint32_t v) { o.write(reinterpret_cast<const char*>(&v), 4); }
void put16(std::ofstream& o, std::uint16_t v) { o.write(reinterpret_cast<const char*>(&v), 2); }

TEST_F(WavTest, ReadsIeeeFloat) {
    const std::vector<float> data{0.25f, -0.5f, 1.0f};
    {
        std::ofstream o(dir_ / "f.wav", std::ios::binary);
        o.write("RIFF", 4);
        put32(o, 36 + 12);
        o.write("WAVEfmt ", 8);
        put32(o, 16);
        put16(o, 3);
        put16(o, 1);
        put32(o, 8000);
        put32(o, 8000 * 4);
        put16(o, 4);
        put16(o, 32);
        o.write("data", 4);
        put32(o, 12);
        o.write(reinterpret_cast<const char*>(data.data()), 12);
    }
    const Audio a = read_wav(dir_ / "f.wav");
    EXPECT_EQ(a.sample_rate, 8000);
    ASSERT_EQ(a.samples.size(), 3U);
    EXPECT_EQ(a.samples[0], 0.25);
    EXPECT_EQ(a.samples[1], -0.5);
}

TEST_F(WavTest, RejectsGarbageAndMissingFiles) {
    std::ofstream(dir_ / "junk.wav") << "definitely not audio";
    EXPECT_THROW(read_wav(dir_ / "junk.wav"), SchemaError);
    EXPECT_THROW(read_wav(dir_ / "nope.wav"), IoError);
}

}  // namespace
}  // namespace mddkm
