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

#include <cstdint>
#include <string>
#include <vector>

namespace mddkm {

/// Spectral signature and instance statistics of one synthetic note class.
///
/// An instance is a sum of harmonics whose common fundamental sweeps linearly by
/// `sweep` (relative, over the note) and is vibrato-modulated by `fm_depth` at
/// `fm_rate_hz`; the amplitude is modulated by `am_depth` at `am_rate_hz`.
struct NoteClassSpec {
    std::string name;
    int count = 1;
    int min_windows = 80;  // instance duration range, in sliding windows
    int max_windows = 160;
    std::vector<double> harmonics_hz;
    std::vector<double> harmonic_amps;
    double am_rate_hz = 0.0;
    double am_depth = 0.0;
    double fm_rate_hz = 0.0;
    double fm_depth = 0.0;
    double sweep = 0.0;
    bool training = false;

    friend bool operator==(const NoteClassSpec&, const NoteClassSpec&) = default;
};

struct SyntheticCorpusSpec {
    std::vector<NoteClassSpec> classes;
    int sample_rate = 22050;
    int window_len = 96;
    int overlap = 48;
    double amplitude = 0.5;     // peak level of the harmonic sum before noise
    double noise_floor = 1e-3;  // std of additive white noise
    double frequency_jitter = 0.01;
    double amplitude_jitter = 0.1;
    double ramp_ms = 3.0;

    /// Throws InvalidInput for zero classes, bad ranges, or duplicate signatures.
    void validate() const;

    std::vector<std::string> training_classes() const;

    /// Eight classes with counts 15, 6, 4, 4, 4, 6, 7, 10; the first three train.
    static SyntheticCorpusSpec reference();

    friend bool operator==(const SyntheticCorpusSpec&, const SyntheticCorpusSpec&) = default;
};

struct CorpusInstance {
    std::string class_name;
    std::size_t start_sample = 0;
    std::size_t end_sample = 0;  // exclusive
};

/// Every instance back to back with no gaps, class by class. Samples are
/// already quantized to 16-bit PCM so a written corpus reads back identically.
struct Corpus {
    int sample_rate = 22050;
    std::vector<double> samples;
    std::vector<CorpusInstance> instances;
    std::vector<std::string> class_names;
    std::vector<std::string> training_classes;

    void validate() const;
    std::vector<std::size_t> instances_of(const std::string& class_name) const;
};

/// Deterministic in (spec, seed).
Corpus synthesize(const SyntheticCorpusSpec& spec, std::uint64_t seed);

/// Samples of a single synthetic note of `windows` windows.
std::vector<double> synthesize_note(const SyntheticCorpusSpec& spec, const NoteClassSpec& note, int windows,
                                    std::uint64_t seed);

}  // namespace mddkm
