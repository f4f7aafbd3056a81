#include "flutesim/score.hpp"

#include <cctype>

#include "flutesim/error.hpp"

namespace flutesim {

void validate_score(const Score& score) {
    if (score.ticks_per_quarter <= 0)
        throw Error(ErrorCode::DomainError, "ticks_per_quarter must be positive");
    const NoteEvent* prev = nullptr;
    for (std::size_t i = 0; i < score.events.size(); ++i) {
        const NoteEvent& e = score.events[i];
        if (e.midi_note < kLowestNote || e.midi_note > kHighestNote)
            throw Error(ErrorCode::RangeError,
                        "note " + std::to_string(e.midi_note) + " at index " +
                            std::to_string(i) + " outside playable range " +
                            std::to_string(kLowestNote) + ".." + std::to_string(kHighestNote));
        if (!(e.duration_ms > 0.0))
            throw Error(ErrorCode::DomainError,
                        "non-positive duration at index " + std::to_string(i));
        if (e.onset_ms < 0.0)
            throw Error(ErrorCode::DomainError,
                        "negative onset at index " + std::to_string(i));
        if (prev) {
            if (e.onset_ms < prev->onset_ms)
                throw Error(ErrorCode::DomainError,
                            "events not sorted by onset at index " + std::to_string(i));
            if (e.onset_ms < prev->off_ms() - 1e-9)
                throw Error(ErrorCode::PolyphonyError,
                            "note at index " + std::to_string(i) +
                                " overlaps the previous note (monophonic input required)");
        }
        prev = &e;
    }
}

namespace {

int letter_semitone(char letter) {
    switch (letter) {
    case 'C': return 0;
    case 'D': return 2;
    case 'E': return 4;
    case 'F': return 5;
    case 'G': return 7;
    case 'A': return 9;
    case 'B': return 11;
    default: return -1;
    }
}

} // namespace

int note_name_to_midi(const std::string& name) {
    if (name.size() < 2)
        throw Error(ErrorCode::SyntaxError, "bad note name '" + name + "'");
    std::size_t pos = 0;
    const int semitone = letter_semitone(static_cast<char>(std::toupper(name[pos])));
    if (semitone < 0)
        throw Error(ErrorCode::SyntaxError, "bad note letter in '" + name + "'");
    ++pos;
    int accidental = 0;
    if (name[pos] == '#') {
        accidental = 1;
        ++pos;
    } else if (name[pos] == 'b') {
        accidental = -1;
        ++pos;
    }
    if (pos >= name.size())
        throw Error(ErrorCode::SyntaxError, "missing octave in '" + name + "'");
    bool negative = false;
    if (name[pos] == '-') {
        negative = true;
        ++pos;
    }
    if (pos >= name.size() || !std::isdigit(static_cast<unsigned char>(name[pos])))
        throw Error(ErrorCode::SyntaxError, "bad octave in '" + name + "'");
    int octave = 0;
    for (; pos < name.size(); ++pos) {
        if (!std::isdigit(static_cast<unsigned char>(name[pos])))
            throw Error(ErrorCode::SyntaxError, "bad octave in '" + name + "'");
        octave = octave * 10 + (name[pos] - '0');
    }
    if (negative) octave = -octave;
    // Scientific pitch notation: C4 = 60.
    return 12 * (octave + 1) + semitone + accidental;
}

std::string midi_to_note_name(int midi_note) {
    static const char* kNames[12] = {"C",  "C#", "D",  "D#", "E",  "F",
                                     "F#", "G",  "G#", "A",  "A#", "B"};
    const int octave = midi_note / 12 - 1;
    const int pc = midi_note % 12;
    return std::string(kNames[pc]) + std::to_string(octave);
}

} // namespace flutesim
