#include "flutesim/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "flutesim/error.hpp"

namespace flutesim {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(char(v & 0xFF));
    out.push_back(char(v >> 8 & 0xFF));
    out.push_back(char(v >> 16 & 0xFF));
    out.push_back(char(v >> 24 & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(char(v & 0xFF));
    out.push_back(char(v >> 8 & 0xFF));
}

std::uint32_t get_u32(const std::string& data, std::size_t pos) {
    return std::uint32_t(std::uint8_t(data[pos])) |
           std::uint32_t(std::uint8_t(data[pos + 1])) << 8 |
           std::uint32_t(std::uint8_t(data[pos + 2])) << 16 |
           std::uint32_t(std::uint8_t(data[pos + 3])) << 24;
}

std::uint16_t get_u16(const std::string& data, std::size_t pos) {
    return std::uint16_t(std::uint8_t(data[pos]) | std::uint8_t(data[pos + 1]) << 8);
}

} // namespace

void write_wav(const AudioBuffer& buffer, const std::string& path) {
    const std::uint32_t data_bytes = std::uint32_t(buffer.samples.size() * 2);
    const std::uint32_t sr = std::uint32_t(buffer.sample_rate_hz);

    std::string out;
    out.reserve(44 + data_bytes);
    out += "RIFF";
    put_u32(out, 36 + data_bytes);
    out += "WAVEfmt ";
    put_u32(out, 16);
    put_u16(out, 1); // PCM
    put_u16(out, 1); // mono
    put_u32(out, sr);
    put_u32(out, sr * 2); // byte rate
    put_u16(out, 2);      // block align
    put_u16(out, 16);     // bits per sample
    out += "data";
    put_u32(out, data_bytes);
    for (double v : buffer.samples) {
        const double clamped = std::clamp(v, -1.0, 1.0);
        // Scale by 2^15 so the round-trip error stays within one LSB (2^-15).
        const auto q = static_cast<std::int16_t>(
            std::clamp(std::lround(clamped * 32768.0), -32768L, 32767L));
        put_u16(out, std::uint16_t(q));
    }

    std::ofstream file(path, std::ios::binary);
    if (!file || !(file << out))
        throw Error(ErrorCode::IoError, "cannot write WAV file '" + path + "'");
}

AudioBuffer read_wav(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw Error(ErrorCode::IoError, "cannot open WAV file '" + path + "'");
    std::string data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

    if (data.size() < 12 || data.compare(0, 4, "RIFF") != 0 || data.compare(8, 4, "WAVE") != 0)
        throw Error(ErrorCode::MalformedFile, "not a RIFF/WAVE file: '" + path + "'");

    AudioBuffer buffer;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= data.size()) {
        const std::string id = data.substr(pos, 4);
        const std::uint32_t size = get_u32(data, pos + 4);
        pos += 8;
        if (pos + size > data.size())
            throw Error(ErrorCode::MalformedFile, "chunk overruns WAV file");
        if (id == "fmt ") {
            if (size < 16)
                throw Error(ErrorCode::MalformedFile, "short fmt chunk");
            if (get_u16(data, pos) != 1 || get_u16(data, pos + 2) != 1 ||
                get_u16(data, pos + 14) != 16)
                throw Error(ErrorCode::UnsupportedFormat,
                            "only 16-bit PCM mono WAV is supported");
            buffer.sample_rate_hz = int(get_u32(data, pos + 4));
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt)
                throw Error(ErrorCode::MalformedFile, "data chunk before fmt chunk");
            buffer.samples.reserve(size / 2);
            for (std::size_t i = 0; i + 1 < size; i += 2) {
                const auto q = static_cast<std::int16_t>(get_u16(data, pos + i));
                buffer.samples.push_back(q / 32768.0);
            }
            return buffer;
        }
        pos += size + (size & 1);
    }
    throw Error(ErrorCode::MalformedFile, "WAV file has no data chunk");
}

} // namespace flutesim
