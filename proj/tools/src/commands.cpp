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

#include "commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "mddkm/audio.hpp"
#include "mddkm/error.hpp"
#include "mddkm/experiment.hpp"
#include "mddkm/io.hpp"
#include "mddkm/serialize.hpp"

namespace mddkm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCorpusWav = "corpus.wav";
constexpr const char* kManifest = "manifest.csv";

fs::path prepare_out(const CommonOptions& opts) {
    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + opts.out_dir.string() + ": " + ec.message());
    return opts.out_dir;
}

CsvMeta base_meta(const PipelineConfig& config, const char* artifact) {
    return CsvMeta{{"artifact", artifact}, {"config_hash", config_hash(config)}, {"seed", std::to_string(config.seed)}};
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ";" : "") + items[i];
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t end = s.find(';', start);
        out.push_back(s.substr(start, end == std::string::npos ? std::string::npos : end - start));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

Corpus load_corpus(const fs::path& dir) {
    Corpus corpus = corpus_from_manifest(read_csv(dir / kManifest));
    Audio audio = read_wav(dir / kCorpusWav);
    if (audio.sample_rate != corpus.sample_rate) {
        throw InvalidInput("corpus WAV sample rate " + std::to_string(audio.sample_rate) +
                           " differs from the manifest's " + std::to_string(corpus.sample_rate));
    }
    corpus.samples = std::move(audio.samples);
    corpus.validate();
    return corpus;
}

void write_clip(const fs::path& out, const std::string& stem, const Clip& clip, int sample_rate, CsvMeta meta) {
    write_wav_pcm16(out / (stem + "_clip.wav"), Audio{clip.samples, sample_rate});
    write_csv(out / (stem + "_truth.csv"), truth_table(clip.truth, std::move(meta)));
}

void warn_hash(const std::string& artifact_hash, const PipelineConfig& config, const fs::path& path) {
    const std::string current = config_hash(config);
    if (artifact_hash != current) {
        std::cerr << "warning: " << path.string() << " was produced under config " << artifact_hash
                  << ", current config is " << current << '\n';
    }
}

Detector load_detector(const fs::path& path, ArtifactInfo& info) {
    const json doc = read_json_file(path);
    Detector d;
    d.algorithm = algorithm_from_string(artifact_kind(doc));
    if (d.algorithm == Algorithm::MddKm) {
        d.model = model_from_json(doc, &info);
    } else {
        d.prototypes = prototypes_from_json(doc, &info);
        d.neighbors = info.neighbors;
    }
    d.tau = info.tau;
    return d;
}

}  // namespace

PipelineConfig effective_config(const CommonOptions& opts) {
    PipelineConfig config = opts.config_path.empty() ? PipelineConfig{} : load_config(opts.config_path);
    if (opts.seed) config.seed = *opts.seed;
    config.validate();
    return config;
}

void synth_cmd(const CommonOptions& opts, std::optional<std::uint64_t> corpus_seed) {
    PipelineConfig config = effective_config(opts);
    if (corpus_seed) config.experiment.corpus_seed = *corpus_seed;
    const fs::path out = prepare_out(opts);
    const Corpus corpus = synthesize(config.corpus, config.experiment.corpus_seed);
    CsvMeta meta = base_meta(config, "manifest");
    meta["corpus_seed"] = std::to_string(config.experiment.corpus_seed);
    write_wav_pcm16(out / kCorpusWav, Audio{corpus.samples, corpus.sample_rate});
    write_csv(out / kManifest, manifest_table(corpus, meta));

    const Split split = split_corpus(corpus, config.experiment.train_per_class, config.seed);
    std::vector<int> demo_counts(split.classes.size(), 1);
    for (std::size_t c = 0; c < demo_counts.size() && c < 2; ++c) demo_counts[c] = 3 - static_cast<int>(c);
    meta["artifact"] = "ground_truth";
    write_clip(out, "test", build_clip(corpus, split.test, split.classes), corpus.sample_rate, meta);
    write_clip(out, "demo", build_clip(corpus, demo_order(corpus, split, demo_counts, 3, config.seed), split.classes),
               corpus.sample_rate, meta);
    std::cout << "wrote " << corpus.instances.size() << " instances (" << corpus.samples.size() << " samples) to "
              << out.string() << '\n';
}

void train_cmd(const CommonOptions& opts, const fs::path& corpus_dir, const std::string& algorithm) {
    const PipelineConfig config = effective_config(opts);
    const Algorithm alg = algorithm_from_string(algorithm);
    const Corpus corpus = load_corpus(corpus_dir);
    const fs::path out = prepare_out(opts);
    const FeatureExtractor extractor(config.hlds);
    const Split split = split_corpus(corpus, config.experiment.train_per_class, config.seed);
    const TrainingSet calibration = training_features(extractor, corpus, split, 1);
    const int stride = alg == Algorithm::MddKm ? config.mddkm.train_stride : config.pknn.train_stride;
    const TrainingSet fit = stride == 1 ? calibration : training_features(extractor, corpus, split, stride);
    const Detector det = train_detector(alg, fit, calibration, config, config.seed);

    ArtifactInfo info{config_hash(config), det.tau, det.neighbors};
    const fs::path path = out / (std::string(to_string(alg)) + "_model.json");
    write_json_file(path, alg == Algorithm::MddKm ? model_to_json(*det.model, info)
                                                  : prototypes_to_json(*det.prototypes, info));
    std::cout << "trained " << to_string(alg) << " on " << fit.total_size() << " windows; tau = " << det.tau
              << "; wrote " << path.string() << '\n';
}

void score_cmd(const CommonOptions& opts, const fs::path& model_path, const fs::path& audio_path,
               bool write_features) {
    const PipelineConfig config = effective_config(opts);
    ArtifactInfo info;
    const Detector det = load_detector(model_path, info);
    warn_hash(info.config_hash, config, model_path);
    const Audio audio = read_wav(audio_path);
    const fs::path out = prepare_out(opts);
    const FeatureExtractor extractor(config.hlds);
    const Eigen::MatrixXd features = extractor.extract(audio.samples);
    if (features.cols() < 1) throw InvalidInput(audio_path.string() + " is shorter than one window");
    const ScoreTrack raw = det.raw_scores(features, config.hlds.hop(), config.hlds.window_len);
    const ScoreTrack transformed = det.decision_scores(raw, config.decision.transform_floor);

    CsvMeta meta = base_meta(config, "scores");
    meta["algorithm"] = to_string(det.algorithm);
    meta["model_config_hash"] = info.config_hash;
    meta["tau"] = format_double(det.tau);
    write_csv(out / "scores.csv", score_table(raw, transformed, det.labels(), meta));
    if (write_features) {
        write_csv(out / "features.csv", feature_table(features, config.hlds.hop(), base_meta(config, "features")));
    }
    std::cout << "scored " << raw.windows() << " windows; wrote " << (out / "scores.csv").string() << '\n';
}

void segment_cmd(const CommonOptions& opts, const fs::path& scores_path, std::optional<double> tau) {
    const PipelineConfig config = effective_config(opts);
    const CsvTable table = read_csv(scores_path);
    const ScoreFile scores = scores_from_table(table);
    double threshold = 0.0;
    if (tau) {
        threshold = *tau;
    } else {
        auto it = scores.meta.find("tau");
        if (it == scores.meta.end()) throw SchemaError(scores_path.string() + ": no tau recorded; pass --tau");
        threshold = std::stod(it->second);
    }
    DecisionConfig dc{threshold, config.decision.min_note_len, config.decision.dominance_len};
    const std::vector<DecisionSegment> segments = decide(scores.transformed, dc);
    const fs::path out = prepare_out(opts);
    CsvMeta meta = base_meta(config, "segments");
    meta["classes"] = join(scores.labels);
    meta["tau"] = format_double(threshold);
    write_csv(out / "segments.csv",
              segment_table(segments, scores.labels, scores.transformed.hop, scores.transformed.window_len, meta));
    std::cout << "wrote " << segments.size() << " segments to " << (out / "segments.csv").string() << '\n';
}

void eval_segments_cmd(const CommonOptions& opts, const fs::path& segments_path, const fs::path& truth_path) {
    const PipelineConfig config = effective_config(opts);
    const CsvTable truth_csv = read_csv(truth_path);
    auto cls = truth_csv.meta.find("classes");
    if (cls == truth_csv.meta.end()) throw SchemaError(truth_path.string() + ": missing metadata 'classes'");
    const std::vector<std::string> classes = split_list(cls->second);
    const GroundTruth truth = truth_from_table(truth_csv, classes);
    const std::vector<DecisionSegment> segments = segments_from_table(read_csv(segments_path), classes);

    const int w = config.hlds.window_len;
    const int q = config.hlds.overlap;
    const EvalReport window =
        confusion_windows(labels_from_segments(segments), truth.window_labels(w, q), classes, config.seed);
    const EvalReport note = confusion_notes(segments, truth, w, q, config.seed);
    const fs::path out = prepare_out(opts);
    json summary{{"config_hash", config_hash(config)}, {"classes", classes}};
    for (const EvalReport* r : {&window, &note}) {
        const std::string unit = to_string(r->unit);
        write_csv(out / ("confusion_" + unit + ".csv"), confusion_table(*r, base_meta(config, "confusion")));
        write_csv(out / ("f_scores_" + unit + ".csv"), f_score_table(*r, base_meta(config, "f_scores")));
        json pc = json::object();
        const std::size_t scored = r->unit == EvalUnit::Window ? r->categories.size() : r->num_classes();
        for (std::size_t k = 0; k < scored; ++k) pc[r->categories[k]] = r->f_scores(static_cast<Eigen::Index>(k));
        summary[unit] = json{{"per_class", pc}, {"overall", r->macro_f}, {"ood_to_class", r->ood_to_class()}};
    }
    write_json_file(out / "report.json", summary);
    std::cout << "window macro F = " << window.macro_f << ", note macro F = " << note.macro_f << '\n';
}

void eval_experiment_cmd(const CommonOptions& opts, const fs::path& corpus_dir,
                         const std::vector<std::string>& algorithms, const std::vector<std::uint64_t>& seeds) {
    const PipelineConfig config = effective_config(opts);
    const Corpus corpus = load_corpus(corpus_dir);
    std::vector<Algorithm> algs;
    for (const auto& a : algorithms) algs.push_back(algorithm_from_string(a));
    const ExperimentResult result =
        run_experiment(corpus, config, seeds.empty() ? config.experiment.seeds : seeds, algs);
    const fs::path out = prepare_out(opts);
    write_json_file(out / "summary.json", result.summary);
    const std::string table = format_summary(result.summary);
    {
        std::ofstream txt(out / "summary.txt", std::ios::binary);
        if (!txt) throw IoError("cannot write " + (out / "summary.txt").string());
        txt << table;
    }

    CsvTable f{base_meta(config, "f_scores"), {"seed", "algorithm", "unit", "category", "f_score"}, {}};
    CsvTable c{base_meta(config, "confusion"), {"seed", "algorithm", "unit", "true", "predicted", "count"}, {}};
    for (const auto& s : result.seeds) {
        for (const auto& a : s.algorithms) {
            for (const EvalReport* r : {&a.window, &a.note}) {
                const std::string seed = std::to_string(s.seed);
                const std::string unit = to_string(r->unit);
                const std::size_t scored = r->unit == EvalUnit::Window ? r->categories.size() : r->num_classes();
                for (std::size_t k = 0; k < scored; ++k) {
                    f.rows.push_back({seed, to_string(a.algorithm), unit, r->categories[k],
                                      format_double(r->f_scores(static_cast<Eigen::Index>(k)))});
                }
                f.rows.push_back({seed, to_string(a.algorithm), unit, "macro", format_double(r->macro_f)});
                for (Eigen::Index i = 0; i < r->confusion.rows(); ++i) {
                    for (Eigen::Index j = 0; j < r->confusion.cols(); ++j) {
                        c.rows.push_back({seed, to_string(a.algorithm), unit,
                                          r->categories[static_cast<std::size_t>(i)],
                                          r->categories[static_cast<std::size_t>(j)],
                                          std::to_string(r->confusion(i, j))});
                    }
                }
                for (Eigen::Index j = 0; j < r->spurious.size(); ++j) {
                    if (r->spurious(j) == 0) continue;
                    c.rows.push_back({seed, to_string(a.algorithm), unit, "spurious",
                                      r->categories[static_cast<std::size_t>(j)], std::to_string(r->spurious(j))});
                }
            }
        }
    }
    write_csv(out / "f_scores.csv", f);
    write_csv(out / "confusion.csv", c);
    std::cout << table;
}

void config_cmd(const CommonOptions& opts) {
    const PipelineConfig config = effective_config(opts);
    const fs::path out = prepare_out(opts);
    write_json_file(out / "config.json", to_json(config));
    std::cout << "config hash " << config_hash(config) << "; wrote " << (out / "config.json").string() << '\n';
}

int run(int argc, char** argv) {
    CLI::App app{"Multiclass out-of-distribution note detection on audio streams"};
    app.require_subcommand(1);
    CommonOptions opts;
    std::string out_dir = ".";
    std::string config_path;
    std::uint64_t seed = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file (defaults when omitted)")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Pipeline seed (training-instance selection, training)");
        sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    };

    std::uint64_t corpus_seed = 0;
    auto* synth = app.add_subcommand("synth", "Synthesize the reference corpus and test clips");
    add_common(synth);
    synth->add_option("--corpus-seed", corpus_seed, "Corpus generator seed (overrides the config)");

    std::string corpus_dir;
    std::string algorithm = "mddkm";
    auto* train = app.add_subcommand("train", "Train a detector on a synthesized corpus");
    add_common(train);
    train->add_option("--corpus", corpus_dir, "Directory written by synth")->required()->check(CLI::ExistingDirectory);
    train->add_option("--algorithm", algorithm, "mddkm or pknn")
        ->check(CLI::IsMember({"mddkm", "pknn"}))
        ->capture_default_str();

    std::string model_path;
    std::string audio_path;
    bool features = false;
    auto* score = app.add_subcommand("score", "Score every window of a WAV file");
    add_common(score);
    score->add_option("--model", model_path, "Model written by train")->required()->check(CLI::ExistingFile);
    score->add_option("--audio", audio_path, "Mono WAV file")->required()->check(CLI::ExistingFile);
    score->add_flag("--features", features, "Also write the per-window feature matrix");

    std::string scores_path;
    double tau = 0.0;
    auto* segment = app.add_subcommand("segment", "Turn a score track into labeled segments");
    add_common(segment);
    segment->add_option("--scores", scores_path, "Score CSV written by score")->required()->check(CLI::ExistingFile);
    auto* tau_opt = segment->add_option("--tau", tau, "Override the threshold recorded with the scores");

    std::string segments_path;
    std::string truth_path;
    std::vector<std::string> algorithms{"mddkm", "pknn"};
    std::vector<std::uint64_t> seeds;
    auto* eval = app.add_subcommand("eval", "Run the multi-seed protocol, or score one segmentation");
    add_common(eval);
    auto* eval_corpus = eval->add_option("--corpus", corpus_dir, "Directory written by synth")
                            ->check(CLI::ExistingDirectory);
    auto* eval_segments = eval->add_option("--segments", segments_path, "Segment CSV")->check(CLI::ExistingFile);
    auto* eval_truth = eval->add_option("--truth", truth_path, "Ground-truth CSV")->check(CLI::ExistingFile);
    eval_segments->needs(eval_truth);
    eval_truth->needs(eval_segments);
    eval_corpus->excludes(eval_segments);
    eval->add_option("--algorithms", algorithms, "Algorithms to compare")
        ->check(CLI::IsMember({"mddkm", "pknn"}))
        ->capture_default_str();
    eval->add_option("--seeds", seeds, "Seeds (default: the config's list)");

    auto* config = app.add_subcommand("config", "Write the effective config");
    add_common(config);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    CLI::App* active = app.get_subcommands().front();
    opts.out_dir = out_dir;
    opts.config_path = config_path;
    if (active->count("--seed") > 0) opts.seed = seed;
    try {
        if (active == synth) {
            synth_cmd(opts, synth->count("--corpus-seed") > 0 ? std::optional<std::uint64_t>(corpus_seed)
                                                              : std::nullopt);
        } else if (active == train) {
            train_cmd(opts, corpus_dir, algorithm);
        } else if (active == score) {
            score_cmd(opts, model_path, audio_path, features);
        } else if (active == segment) {
            segment_cmd(opts, scores_path, tau_opt->count() > 0 ? std::optional<double>(tau) : std::nullopt);
        } else if (active == eval) {
            if (eval_segments->count() > 0) {
                eval_segments_cmd(opts, segments_path, truth_path);
            } else if (eval_corpus->count() > 0) {
                eval_experiment_cmd(opts, corpus_dir, algorithms, seeds);
            } else {
                std::cerr << "eval: pass --corpus, or --segments with --truth\n";
                return kUsage;
            }
        } else {
            config_cmd(opts);
        }
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return kSchemaFailure;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const Error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kOk;
}

}  // namespace mddkm::cli
