#pragma once

#include <string>

#include "flutesim/synth.hpp"

namespace flutesim {

/// Writes a 16-bit PCM mono RIFF/WAVE file. Samples are clamped to [-1, 1]
/// and rounded; an empty buffer produces a valid zero-length-data file.
void write_wav(const AudioBuffer& buffer, const std::string& path);

/// Reads a file produced by write_wav (16-bit PCM mono only).
AudioBuffer read_wav(const std::string& path);

} // namespace flutesim
