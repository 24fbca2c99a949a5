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
#include <vector>

namespace mddkm {

/// Mono audio with samples normalized to [-1, 1].
struct Audio {
    std::vector<double> samples;
    int sample_rate = 22050;
};

/// Reads a mono RIFF/WAVE file: 16-bit PCM or 32-bit IEEE float.
Audio read_wav(const std::filesystem::path& path);

/// Writes 16-bit PCM mono. Samples are clamped to [-1, 1] and scaled by 32767.
void write_wav_pcm16(const std::filesystem::path& path, const Audio& audio);

/// The value a sample takes after a 16-bit PCM write/read round trip.
double quantize_pcm16(double sample);

}  // namespace mddkm
