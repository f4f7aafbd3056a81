#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace flutesim {

// The playable range of the instrument: C4..C7 in scientific pitch
// notation with C4 = MIDI 60.
inline constexpr int kLowestNote = 60;
inline constexpr int kHighestNote = 96;
inline constexpr int kNoteCount = kHighestNote - kLowestNote + 1; // 37

/// One scheduled note. Onsets/durations are in milliseconds of score time.
struct NoteEvent {
    int midi_note = 0;
    double onset_ms = 0.0;
    double duration_ms = 0.0;
    int velocity = 64;

    double off_ms() const { return onset_ms + duration_ms; }

    bool operator==(const NoteEvent&) const = default;
};

struct TempoChange {
    std::uint32_t tick = 0;
    std::uint32_t microseconds_per_quarter = 500000;
};

/// A validated, time-ordered monophonic note list plus source metadata.
struct Score {
    std::vector<NoteEvent> events;
    int ticks_per_quarter = 480;
    std::vector<TempoChange> tempo_map;
};

/// Enforces the Score invariants: notes inside the playable range, positive
/// durations, sorted onsets, and no overlap (monophonic instrument).
/// Throws RangeError / PolyphonyError / DomainError.
void validate_score(const Score& score);

/// "A4" -> 69, "F#5" -> 78, "Bb4" -> 70. Throws SyntaxError on bad names.
int note_name_to_midi(const std::string& name);

/// 69 -> "A4". Sharps are used for black keys.
std::string midi_to_note_name(int midi_note);

} // namespace flutesim
