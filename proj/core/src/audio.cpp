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

#include "mddkm/audio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "mddkm/error.hpp"

namespace mddkm {

namespace {

constexpr double kPcm16Scale = 32767.0;

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

}  // namespace

double quantize_pcm16(double sample) {
    const double clamped = std::clamp(sample, -1.0, 1.0);
    return static_cast<double>(static_cast<std::int16_t>(std::lround(clamped * kPcm16Scale))) / kPcm16Scale;
}

Audio read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open WAV file " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0) {
        throw SchemaError(path.string() + " is not a RIFF/WAVE file");
    }
    std::size_t pos = 12;
    int format = 0;
    int channels = 0;
    int bits = 0;
    Audio audio;
    const unsigned char* pcm = nullptr;
    std::size_t pcm_bytes = 0;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t size = read_u32(data + pos + 4);
        const std::size_t body = pos + 8;
        if (body + size > bytes.size()) throw SchemaError(path.string() + ": truncated WAV chunk");
        if (std::memcmp(data + pos, "fmt ", 4) == 0 && size >= 16) {
            format = read_u16(data + body);
            channels = read_u16(data + body + 2);
            audio.sample_rate = static_cast<int>(read_u32(data + body + 4));
            bits = read_u16(data + body + 14);
            if (format == 0xFFFE && size >= 40) format = read_u16(data + body + 24);  // extensible
        } else if (std::memcmp(data + pos, "data", 4) == 0) {
            pcm = data + body;
            pcm_bytes = size;
        }
        pos = body + size + (size & 1u);
    }
    if (!pcm || format == 0) throw SchemaError(path.string() + ": missing fmt or data chunk");
    if (channels != 1) throw SchemaError(path.string() + ": expected mono audio, got " + std::to_string(channels) + " channels");
    if (format == 1 && bits == 16) {
        const std::size_t n = pcm_bytes / 2;
        audio.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto v = static_cast<std::int16_t>(read_u16(pcm + 2 * i));
            audio.samples[i] = std::max(-1.0, static_cast<double>(v) / kPcm16Scale);
        }
    } else if (format == 3 && bits == 32) {
        const std::size_t n = pcm_bytes / 4;
        audio.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint32_t raw = read_u32(pcm + 4 * i);
            float f;
            std::memcpy(&f, &raw, sizeof f);
            audio.samples[i] = std::clamp(static_cast<double>(f), -1.0, 1.0);
        }
    } else {
        throw SchemaError(path.string() + ": unsupported WAV encoding (format " + std::to_string(format) + ", " +
                          std::to_string(bits) + " bits)");
    }
    return audio;
}

void write_wav_pcm16(const std::filesystem::path& path, const Audio& audio) {
    const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
    std::string out;
    out.reserve(44 + data_bytes);
    out += "RIFF";
    put_u32(out, 36 + data_bytes);
    out += "WAVEfmt ";
    put_u32(out, 16);
    put_u16(out, 1);
    put_u16(out, 1);
    put_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
    put_u32(out, static_cast<std::uint32_t>(audio.sample_rate) * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    out += "data";
    put_u32(out, data_bytes);
    for (double s : audio.samples) {
        const auto v = static_cast<std::int16_t>(std::lround(std::clamp(s, -1.0, 1.0) * kPcm16Scale));
        put_u16(out, static_cast<std::uint16_t>(v));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write WAV file " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("failed writing WAV file " + path.string());
}

}  // namespace mddkm
