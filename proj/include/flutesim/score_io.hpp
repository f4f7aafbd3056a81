#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "flutesim/score.hpp"

namespace flutesim {

/// Parse a Standard MIDI File (format 0 or 1) into a Score.
///
/// Only note-on/note-off and tempo meta events are consumed; a note-on with
/// velocity 0 counts as a note-off. Overlapping notes are rejected
/// (PolyphonyError) and notes outside C4..C7 are rejected (RangeError).
Score parse_midi(std::span<const std::uint8_t> bytes);

/// Parse the line-oriented text score format:
///
///   # comment
///   C4 400
///   F#5 200 96     <- optional third column: velocity
///   R 50           <- rest, advances the running onset
///
/// Onsets accumulate sequentially from 0.
Score parse_text_score(const std::string& text);

/// Inverse of parse_text_score; rests are emitted for inter-note gaps and
/// velocities are always written, so parse(serialize(s)) == s events-wise.
std::string serialize_text_score(const Score& score);

/// Reads a score file, sniffing SMF ("MThd" magic) vs text.
Score load_score_file(const std::string& path);

} // namespace flutesim
