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

#include "mddkm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <tuple>

#include "mddkm/audio.hpp"
#include "mddkm/error.hpp"

namespace mddkm {

void SyntheticCorpusSpec::validate() const {
    if (classes.empty()) throw InvalidInput("synthetic corpus spec has no classes");
    if (sample_rate < 1 || window_len < 1 || overlap < 0 || overlap >= window_len) {
        throw InvalidInput("synthetic corpus spec: invalid sample rate or window settings");
    }
    if (!(amplitude > 0.0 && amplitude <= 1.0) || noise_floor < 0.0 || frequency_jitter < 0.0 ||
        amplitude_jitter < 0.0 || amplitude_jitter >= 1.0 || ramp_ms < 0.0) {
        throw InvalidInput("synthetic corpus spec: invalid level or jitter settings");
    }
    std::set<std::string> names;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const auto& c = classes[i];
        if (c.name.empty() || !names.insert(c.name).second) {
            throw InvalidInput("synthetic class names must be unique and nonempty ('" + c.name + "')");
        }
        if (c.count < 1) throw InvalidInput("synthetic class '" + c.name + "' needs at least one instance");
        if (c.min_windows < 1 || c.max_windows < c.min_windows) {
            throw InvalidInput("synthetic class '" + c.name + "' has an invalid duration range");
        }
        if (c.harmonics_hz.empty() || c.harmonics_hz.size() != c.harmonic_amps.size()) {
            throw InvalidInput("synthetic class '" + c.name + "' needs matching harmonic frequencies and amplitudes");
        }
        for (double f : c.harmonics_hz) {
            if (!(f > 0.0 && f < 0.5 * sample_rate)) {
                throw InvalidInput("synthetic class '" + c.name + "' has a harmonic outside (0, Nyquist)");
            }
        }
        if (c.am_depth < 0.0 || c.am_depth > 1.0 || c.fm_depth < 0.0 || c.fm_depth >= 1.0 ||
            std::abs(c.sweep) >= 1.0 || c.am_rate_hz < 0.0 || c.fm_rate_hz < 0.0) {
            throw InvalidInput("synthetic class '" + c.name + "' has invalid modulation settings");
        }
        for (std::size_t j = 0; j < i; ++j) {
            const auto& o = classes[j];
            if (std::tie(o.harmonics_hz, o.harmonic_amps, o.am_rate_hz, o.am_depth, o.fm_rate_hz, o.fm_depth,
                         o.sweep) == std::tie(c.harmonics_hz, c.harmonic_amps, c.am_rate_hz, c.am_depth,
                                              c.fm_rate_hz, c.fm_depth, c.sweep)) {
                throw InvalidInput("synthetic classes '" + o.name + "' and '" + c.name + "' share a signature");
            }
        }
    }
    if (training_classes().empty()) throw InvalidInput("synthetic corpus spec designates no training class");
}

std::vector<std::string> SyntheticCorpusSpec::training_classes() const {
    std::vector<std::string> out;
    for (const auto& c : classes) {
        if (c.training) out.push_back(c.name);
    }
    return out;
}

SyntheticCorpusSpec SyntheticCorpusSpec::reference() {
    SyntheticCorpusSpec spec;
    spec.amplitude = 0.95;
    // Trills: a tone warbled and gated at a class-specific pair of rates.
    auto add = [&](std::string name, int count, std::vector<double> freqs, std::vector<double> amps, double am_rate,
                   double fm_rate, double fm_depth, bool training) {
        NoteClassSpec c;
        c.name = std::move(name);
        c.count = count;
        c.harmonics_hz = std::move(freqs);
        c.harmonic_amps = std::move(amps);
        c.am_rate_hz = am_rate;
        c.am_depth = 1.0;
        c.fm_rate_hz = fm_rate;
        c.fm_depth = fm_depth;
        c.training = training;
        spec.classes.push_back(std::move(c));
    };
    add("note-a", 15, {2500.0}, {1.0}, 70.0, 85.0, 0.25, true);
    add("note-b", 6, {5200.0}, {1.0}, 90.0, 70.0, 0.20, true);
    add("note-c", 4, {8000.0}, {1.0}, 60.0, 100.0, 0.15, true);
    add("note-d", 4, {1400.0}, {1.0}, 80.0, 75.0, 0.30, false);
    add("note-e", 4, {3800.0}, {1.0}, 100.0, 60.0, 0.20, false);
    add("note-f", 6, {6500.0}, {1.0}, 75.0, 95.0, 0.15, false);
    add("note-g", 7, {9700.0}, {1.0}, 85.0, 80.0, 0.10, false);
    add("note-h", 10, {4300.0, 10300.0}, {1.0, 0.6}, 65.0, 90.0, 0.12, false);
    return spec;
}

void Corpus::validate() const {
    std::size_t cursor = 0;
    for (const auto& inst : instances) {
        if (inst.start_sample != cursor || inst.end_sample <= inst.start_sample) {
            throw InvalidInput("corpus instances do not tile the sample stream");
        }
        if (std::find(class_names.begin(), class_names.end(), inst.class_name) == class_names.end()) {
            throw InvalidInput("corpus instance has unknown class '" + inst.class_name + "'");
        }
        cursor = inst.end_sample;
    }
    if (cursor != samples.size()) throw InvalidInput("corpus instances do not cover the sample stream");
    for (const auto& t : training_classes) {
        if (std::find(class_names.begin(), class_names.end(), t) == class_names.end()) {
            throw InvalidInput("corpus training class '" + t + "' is not a corpus class");
        }
    }
}

std::vector<std::size_t> Corpus::instances_of(const std::string& class_name) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (instances[i].class_name == class_name) out.push_back(i);
    }
    return out;
}

std::vector<double> synthesize_note(const SyntheticCorpusSpec& spec, const NoteClassSpec& note, int windows,
                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const int hop = spec.window_len - spec.overlap;
    const std::size_t n = static_cast<std::size_t>(windows - 1) * static_cast<std::size_t>(hop) +
                          static_cast<std::size_t>(spec.window_len);
    const double fs = spec.sample_rate;
    const double detune = 1.0 + spec.frequency_jitter * (2.0 * unit(rng) - 1.0);
    const double am_phase = 2.0 * std::numbers::pi * unit(rng);
    const double fm_phase = 2.0 * std::numbers::pi * unit(rng);
    std::vector<double> phase(note.harmonics_hz.size());
    std::vector<double> amp(note.harmonics_hz.size());
    double amp_total = 0.0;
    for (std::size_t h = 0; h < phase.size(); ++h) {
        phase[h] = 2.0 * std::numbers::pi * unit(rng);
        amp[h] = note.harmonic_amps[h] * (1.0 + spec.amplitude_jitter * (2.0 * unit(rng) - 1.0));
        amp_total += std::abs(amp[h]);
    }
    const double level = amp_total > 0.0 ? spec.amplitude / amp_total : 0.0;
    const auto ramp = static_cast<std::size_t>(spec.ramp_ms * 1e-3 * fs);

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        const double progress = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
        const double inst_ratio = detune * (1.0 + note.sweep * (progress - 0.5)) *
                                  (1.0 + note.fm_depth * std::sin(2.0 * std::numbers::pi * note.fm_rate_hz * t + fm_phase));
        double v = 0.0;
        for (std::size_t h = 0; h < phase.size(); ++h) {
            phase[h] += 2.0 * std::numbers::pi * note.harmonics_hz[h] * inst_ratio / fs;
            v += amp[h] * std::sin(phase[h]);
        }
        double env = 1.0 - note.am_depth * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * note.am_rate_hz * t + am_phase));
        if (ramp > 0) {
            const std::size_t edge = std::min(i, n - 1 - i);
            if (edge < ramp) env *= 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(edge) / ramp));
        }
        out[i] = level * env * v + spec.noise_floor * gauss(rng);
    }
    return out;
}

Corpus synthesize(const SyntheticCorpusSpec& spec, std::uint64_t seed) {
    spec.validate();
    Corpus corpus;
    corpus.sample_rate = spec.sample_rate;
    corpus.training_classes = spec.training_classes();
    std::mt19937_64 rng(seed);
    for (const auto& c : spec.classes) {
        corpus.class_names.push_back(c.name);
        std::uniform_int_distribution<int> duration(c.min_windows, c.max_windows);
        for (int k = 0; k < c.count; ++k) {
            const int windows = duration(rng);
            const std::uint64_t note_seed = rng();
            std::vector<double> note = synthesize_note(spec, c, windows, note_seed);
            CorpusInstance inst{c.name, corpus.samples.size(), corpus.samples.size() + note.size()};
            for (double s : note) corpus.samples.push_back(quantize_pcm16(s));
            corpus.instances.push_back(std::move(inst));
        }
    }
    return corpus;
}

}  // namespace mddkm
