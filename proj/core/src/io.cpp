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

#include "mddkm/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mddkm/error.hpp"

namespace mddkm {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

void check_cell(const std::string& s) {
    if (s.find_first_of(",\n\r") != std::string::npos) {
        throw InvalidInput("CSV cell '" + s + "' contains a separator");
    }
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) throw SchemaError("CSV: '" + s + "' is not a number");
    return v;
}

long parse_long(const std::string& s) {
    long v = 0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) throw SchemaError("CSV: '" + s + "' is not an integer");
    return v;
}

Label label_index(const std::string& name, const std::vector<std::string>& labels) {
    if (name == "OOD") return kOod;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == name) return static_cast<Label>(i);
    }
    throw InvalidInput("label '" + name + "' is not a known class");
}

std::string label_name(Label l, const std::vector<std::string>& labels) {
    if (l == kOod) return "OOD";
    if (l < 0 || l >= static_cast<Label>(labels.size())) {
        throw InvalidInput("label index " + std::to_string(l) + " outside the alphabet");
    }
    return labels[static_cast<std::size_t>(l)];
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw SchemaError("CSV: missing column '" + name + "'");
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw NumericalError("cannot format a double");
    return std::string(buf, ptr);
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!have_header && line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw SchemaError(path.string() + ": malformed metadata line '" + line + "'");
            t.meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
            continue;
        }
        if (!have_header) {
            t.header = split(line);
            have_header = true;
            continue;
        }
        auto row = split(line);
        if (row.size() != t.header.size()) {
            throw SchemaError(path.string() + ": row has " + std::to_string(row.size()) + " cells, header has " +
                              std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(row));
    }
    if (!have_header) throw SchemaError(path.string() + ": no header row");
    return t;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& [k, v] : table.meta) out << "# " << k << '=' << v << '\n';
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            check_cell(cells[i]);
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    emit(table.header);
    for (const auto& r : table.rows) emit(r);
    if (!out) throw IoError("write failed for " + path.string());
}

CsvTable score_table(const ScoreTrack& raw, const ScoreTrack& transformed, const std::vector<std::string>& labels,
                     CsvMeta meta) {
    if (raw.scores.rows() != transformed.scores.rows() || raw.scores.cols() != transformed.scores.cols() ||
        raw.classes() != static_cast<Eigen::Index>(labels.size())) {
        throw InvalidInput("score table: raw and transformed tracks disagree in shape");
    }
    CsvTable t;
    t.meta = std::move(meta);
    t.meta["hop"] = std::to_string(raw.hop);
    t.meta["window_len"] = std::to_string(raw.window_len);
    t.meta["raw_semantics"] = raw.semantics == ScoreSemantics::MddKmRaw ? "lower-is-closer" : "higher-is-closer";
    t.header = {"window", "start_sample"};
    for (const auto& l : labels) t.header.push_back("raw:" + l);
    for (const auto& l : labels) t.header.push_back("transformed:" + l);
    for (Eigen::Index w = 0; w < raw.windows(); ++w) {
        std::vector<std::string> row{std::to_string(w), std::to_string(w * raw.hop)};
        for (Eigen::Index c = 0; c < raw.classes(); ++c) row.push_back(format_double(raw.scores(w, c)));
        for (Eigen::Index c = 0; c < raw.classes(); ++c) row.push_back(format_double(transformed.scores(w, c)));
        t.rows.push_back(std::move(row));
    }
    return t;
}

ScoreFile scores_from_table(const CsvTable& table) {
    ScoreFile f;
    f.meta = table.meta;
    if (table.header.size() < 4 || (table.header.size() - 2) % 2 != 0 || table.header[0] != "window" ||
        table.header[1] != "start_sample") {
        throw SchemaError("score CSV: unexpected header");
    }
    const std::size_t C = (table.header.size() - 2) / 2;
    for (std::size_t c = 0; c < C; ++c) {
        const std::string& h = table.header[2 + c];
        if (h.rfind("raw:", 0) != 0 || table.header[2 + C + c] != "transformed:" + h.substr(4)) {
            throw SchemaError("score CSV: unexpected column '" + h + "'");
        }
        f.labels.push_back(h.substr(4));
    }
    auto meta_int = [&](const char* key) {
        auto it = table.meta.find(key);
        if (it == table.meta.end()) throw SchemaError(std::string("score CSV: missing metadata '") + key + "'");
        return static_cast<int>(parse_long(it->second));
    };
    const int hop = meta_int("hop");
    const int window_len = meta_int("window_len");
    const auto T = static_cast<Eigen::Index>(table.rows.size());
    if (T < 1) throw SchemaError("score CSV: no windows");
    f.raw.scores.resize(T, static_cast<Eigen::Index>(C));
    f.transformed.scores.resize(T, static_cast<Eigen::Index>(C));
    for (Eigen::Index w = 0; w < T; ++w) {
        const auto& row = table.rows[static_cast<std::size_t>(w)];
        if (parse_long(row[0]) != w) throw SchemaError("score CSV: window indices are not consecutive");
        for (std::size_t c = 0; c < C; ++c) {
            f.raw.scores(w, static_cast<Eigen::Index>(c)) = parse_double(row[2 + c]);
            f.transformed.scores(w, static_cast<Eigen::Index>(c)) = parse_double(row[2 + C + c]);
        }
    }
    auto sem = table.meta.find("raw_semantics");
    f.raw.semantics = sem != table.meta.end() && sem->second == "lower-is-closer" ? ScoreSemantics::MddKmRaw
                                                                                  : ScoreSemantics::HigherIsCloser;
    f.transformed.semantics = ScoreSemantics::HigherIsCloser;
    f.raw.hop = f.transformed.hop = hop;
    f.raw.window_len = f.transformed.window_len = window_len;
    return f;
}

CsvTable segment_table(const std::vector<DecisionSegment>& segments, const std::vector<std::string>& labels, int hop,
                       int window_len, CsvMeta meta) {
    CsvTable t;
    t.meta = std::move(meta);
    t.meta["hop"] = std::to_string(hop);
    t.meta["window_len"] = std::to_string(window_len);
    t.header = {"start_sample", "end_sample", "start_window", "end_window", "label"};
    for (const auto& s : segments) {
        t.rows.push_back({std::to_string(s.start_window * hop), std::to_string(s.end_window * hop + window_len),
                          std::to_string(s.start_window), std::to_string(s.end_window), label_name(s.label, labels)});
    }
    return t;
}

std::vector<DecisionSegment> segments_from_table(const CsvTable& table, const std::vector<std::string>& labels) {
    const std::size_t sw = table.column("start_window");
    const std::size_t ew = table.column("end_window");
    const std::size_t lb = table.column("label");
    std::vector<DecisionSegment> out;
    Eigen::Index cursor = 0;
    for (const auto& row : table.rows) {
        DecisionSegment s{parse_long(row[sw]), parse_long(row[ew]), label_index(row[lb], labels)};
        if (s.start_window != cursor || s.end_window < s.start_window) {
            throw InvalidInput("segment CSV: segments do not tile the window range");
        }
        cursor = s.end_window + 1;
        out.push_back(s);
    }
    return out;
}

CsvTable truth_table(const GroundTruth& truth, CsvMeta meta) {
    truth.validate();
    CsvTable t;
    t.meta = std::move(meta);
    std::string classes;
    for (std::size_t i = 0; i < truth.class_labels.size(); ++i) classes += (i ? ";" : "") + truth.class_labels[i];
    t.meta["classes"] = classes;
    t.header = {"start_sample", "end_sample", "label", "source_class"};
    for (const auto& inst : truth.instances) {
        t.rows.push_back({std::to_string(inst.start_sample), std::to_string(inst.end_sample),
                          label_name(inst.label, truth.class_labels), inst.source_class});
    }
    return t;
}

GroundTruth truth_from_table(const CsvTable& table, const std::vector<std::string>& class_labels) {
    GroundTruth g;
    g.class_labels = class_labels;
    const std::size_t s = table.column("start_sample");
    const std::size_t e = table.column("end_sample");
    const std::size_t l = table.column("label");
    const std::size_t src = table.column("source_class");
    for (const auto& row : table.rows) {
        const long a = parse_long(row[s]);
        const long b = parse_long(row[e]);
        if (a < 0 || b < 0) throw InvalidInput("ground truth: negative sample index");
        g.instances.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(b),
                               label_index(row[l], class_labels), row[src]});
    }
    g.validate();
    return g;
}

CsvTable manifest_table(const Corpus& corpus, CsvMeta meta) {
    CsvTable t;
    t.meta = std::move(meta);
    t.meta["sample_rate"] = std::to_string(corpus.sample_rate);
    t.header = {"instance", "class", "training", "start_sample", "end_sample"};
    for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
        const auto& inst = corpus.instances[i];
        const bool training = std::find(corpus.training_classes.begin(), corpus.training_classes.end(),
                                        inst.class_name) != corpus.training_classes.end();
        t.rows.push_back({std::to_string(i), inst.class_name, training ? "1" : "0", std::to_string(inst.start_sample),
                          std::to_string(inst.end_sample)});
    }
    return t;
}

Corpus corpus_from_manifest(const CsvTable& table) {
    Corpus c;
    auto sr = table.meta.find("sample_rate");
    if (sr == table.meta.end()) throw SchemaError("manifest: missing metadata 'sample_rate'");
    c.sample_rate = static_cast<int>(parse_long(sr->second));
    const std::size_t cls = table.column("class");
    const std::size_t tr = table.column("training");
    const std::size_t s = table.column("start_sample");
    const std::size_t e = table.column("end_sample");
    for (const auto& row : table.rows) {
        const std::string& name = row[cls];
        if (std::find(c.class_names.begin(), c.class_names.end(), name) == c.class_names.end()) {
            c.class_names.push_back(name);
            if (row[tr] == "1") c.training_classes.push_back(name);
        }
        const long a = parse_long(row[s]);
        const long b = parse_long(row[e]);
        if (a < 0 || b < 0) throw InvalidInput("manifest: negative sample index");
        c.instances.push_back({name, static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
    }
    return c;
}

CsvTable feature_table(const Eigen::MatrixXd& features, int hop, CsvMeta meta) {
    CsvTable t;
    t.meta = std::move(meta);
    t.meta["hop"] = std::to_string(hop);
    t.header = {"start_sample"};
    for (Eigen::Index k = 0; k < features.rows(); ++k) t.header.push_back("f" + std::to_string(k));
    for (Eigen::Index w = 0; w < features.cols(); ++w) {
        std::vector<std::string> row{std::to_string(w * hop)};
        for (Eigen::Index k = 0; k < features.rows(); ++k) row.push_back(format_double(features(k, w)));
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable confusion_table(const EvalReport& report, CsvMeta meta) {
    CsvTable t;
    t.meta = std::move(meta);
    t.meta["unit"] = to_string(report.unit);
    t.meta["seed"] = std::to_string(report.seed);
    t.header = {"true"};
    for (const auto& c : report.categories) t.header.push_back(c);
    for (Eigen::Index i = 0; i < report.confusion.rows(); ++i) {
        std::vector<std::string> row{report.categories[static_cast<std::size_t>(i)]};
        for (Eigen::Index j = 0; j < report.confusion.cols(); ++j) row.push_back(std::to_string(report.confusion(i, j)));
        t.rows.push_back(std::move(row));
    }
    // Last row: predicted segments matching no true instance, per predicted category.
    std::vector<std::string> row{"spurious"};
    for (Eigen::Index j = 0; j < report.spurious.size(); ++j) row.push_back(std::to_string(report.spurious(j)));
    t.rows.push_back(std::move(row));
    return t;
}

CsvTable f_score_table(const EvalReport& report, CsvMeta meta) {
    CsvTable t;
    t.meta = std::move(meta);
    t.meta["unit"] = to_string(report.unit);
    t.meta["seed"] = std::to_string(report.seed);
    t.header = {"category", "f_score"};
    const std::size_t scored = report.unit == EvalUnit::Window ? report.categories.size() : report.num_classes();
    for (std::size_t k = 0; k < scored; ++k) {
        t.rows.push_back({report.categories[k], format_double(report.f_scores(static_cast<Eigen::Index>(k)))});
    }
    t.rows.push_back({"macro", format_double(report.macro_f)});
    return t;
}

}  // namespace mddkm
