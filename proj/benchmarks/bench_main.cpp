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

#include <benchmark/benchmark.h>

#include <random>

#include "mddkm/config.hpp"
#include "mddkm/hlds.hpp"
#include "mddkm/kernels.hpp"
#include "mddkm/model.hpp"
#include "mddkm/pknn.hpp"
#include "mddkm/synth.hpp"

namespace {

using namespace mddkm;

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = g(rng);
    return m;
}

TrainingSet three_classes(Eigen::Index per_class, Eigen::Index dim) {
    TrainingSet set;
    for (int c = 0; c < 3; ++c) {
        set.labels.push_back("c" + std::to_string(c));
        set.blocks.push_back((gaussian(dim, per_class, 10 + c).array() + 2.0 * c).matrix());
    }
    return set;
}

void BM_Gram(benchmark::State& state) {
    const Eigen::MatrixXd X = gaussian(12, state.range(0), 1);
    const KernelParams p{1.0, 2.0, 0.1};
    for (auto _ : state) benchmark::DoNotOptimize(gram(X, p, true, RegularizationMode::Nugget));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gram)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void BM_NllGrad(benchmark::State& state) {
    const Eigen::MatrixXd X = gaussian(12, state.range(0), 2);
    const Eigen::VectorXd y = target_vector(X);
    const KernelParams p{1.0, 3.0, 0.3};
    for (auto _ : state) benchmark::DoNotOptimize(nll_grad(p, X, y, RegularizationMode::Nugget, true));
}
BENCHMARK(BM_NllGrad)->RangeMultiplier(2)->Range(32, 256);

void BM_ScoreBatch(benchmark::State& state) {
    const MddKmModel model =
        MddKmModel::from_blocks({1.0, 3.0, 0.3}, RegularizationMode::Nugget, three_classes(state.range(0), 12));
    const Eigen::MatrixXd T = gaussian(12, 1000, 3);
    for (auto _ : state) benchmark::DoNotOptimize(model.score_batch(T));
    state.SetItemsProcessed(state.iterations() * T.cols());
}
BENCHMARK(BM_ScoreBatch)->Arg(50)->Arg(100)->Arg(200);

void BM_Train(benchmark::State& state) {
    const TrainingSet set = three_classes(state.range(0), 12);
    OptimizerConfig cfg;
    cfg.mode = RegularizationMode::Nugget;
    for (auto _ : state) benchmark::DoNotOptimize(train(set, cfg));
}
BENCHMARK(BM_Train)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_KalmanStep(benchmark::State& state) {
    const HldsConfig config;
    const AugmentedModel model = assemble(config);
    HldsState s = initial_state(config);
    const Eigen::VectorXd y = gaussian(config.window_len, 1, 4).cwiseAbs();
    for (auto _ : state) {
        s = kalman_step(model, s, y);
        benchmark::DoNotOptimize(s.mean.data());
    }
}
BENCHMARK(BM_KalmanStep)->Unit(benchmark::kMicrosecond);

void BM_ExtractFeatures(benchmark::State& state) {
    const PipelineConfig config;
    const FeatureExtractor extractor(config.hlds);
    const std::vector<double> audio = synthesize_note(config.corpus, config.corpus.classes.front(), 400, 5);
    for (auto _ : state) benchmark::DoNotOptimize(extractor.extract(audio));
    state.SetItemsProcessed(state.iterations() * 400);
}
BENCHMARK(BM_ExtractFeatures)->Unit(benchmark::kMillisecond);

void BM_Possibility(benchmark::State& state) {
    const PrototypeSet set = train_prototypes(three_classes(60, 12), 2);
    const Eigen::MatrixXd T = gaussian(12, 1000, 6);
    for (auto _ : state) benchmark::DoNotOptimize(possibility_batch(set, T, 3));
    state.SetItemsProcessed(state.iterations() * T.cols());
}
BENCHMARK(BM_Possibility);

}  // namespace

BENCHMARK_MAIN();
