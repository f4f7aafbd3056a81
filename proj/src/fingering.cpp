#include "flutesim/fingering.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "flutesim/error.hpp"
#include "text_util.hpp"

namespace flutesim {

namespace {

// Row order of the shipped actuation profile.
constexpr const char* kKeyNames[kKeyCount] = {
    "LowC", "CSharp", "DSharpLever", "D", "DSharpTrillLever", "E", "DTrillLever",
    "F",    "GSharpLever", "G", "A", "BFlat", "C", "B",
};

} // namespace

const char* key_id_name(KeyId key) {
    return kKeyNames[static_cast<std::size_t>(key)];
}

std::optional<KeyId> key_id_from_name(const std::string& name) {
    for (int i = 0; i < kKeyCount; ++i)
        if (name == kKeyNames[i]) return static_cast<KeyId>(i);
    return std::nullopt;
}

int KeyMask::count() const { return std::popcount(bits_); }

std::vector<KeyId> KeyMask::keys() const {
    std::vector<KeyId> out;
    for (int i = 0; i < kKeyCount; ++i)
        if (bits_ & (1u << i)) out.push_back(static_cast<KeyId>(i));
    return out;
}

std::string KeyMask::to_string() const {
    if (empty()) return "-";
    std::string out;
    for (KeyId k : keys()) {
        if (!out.empty()) out += ",";
        out += key_id_name(k);
    }
    return out;
}

const char* register_name(Register reg) {
    switch (reg) {
    case Register::Low: return "low";
    case Register::Middle: return "middle";
    case Register::High: return "high";
    }
    return "?";
}

Register classify_register(int midi_note, int low_register_max, int high_register_min) {
    if (midi_note < kLowestNote || midi_note > kHighestNote)
        throw Error(ErrorCode::RangeError,
                    "note " + std::to_string(midi_note) + " outside playable range");
    if (midi_note <= low_register_max) return Register::Low;
    if (midi_note >= high_register_min) return Register::High;
    return Register::Middle;
}

TransitionDiff transition_diff(KeyMask from, KeyMask to) {
    return {to.minus(from), from.minus(to)};
}

namespace {

struct ChartEntry {
    const char* name;
    const char* mask;
};

// Standard Boehm covered-key chart, one actuator per pad group. Low- and
// middle-register notes from Eb up share fingerings; the middle D/Eb open
// the first-finger C key as an octave vent. The third octave uses the usual
// cross fingerings, with the trill levers serving Bb6-C7.
constexpr ChartEntry kDefaultChart[kNoteCount] = {
    {"C4", "LowC,CSharp,D,E,F,G,A,BFlat,C,B"},
    {"C#4", "CSharp,D,E,F,G,A,BFlat,C,B"},
    {"D4", "D,E,F,G,A,BFlat,C,B"},
    {"D#4", "D,E,F,G,A,BFlat,C,B,DSharpLever"},
    {"E4", "E,F,G,A,BFlat,C,B,DSharpLever"},
    {"F4", "F,G,A,BFlat,C,B,DSharpLever"},
    {"F#4", "D,G,A,BFlat,C,B,DSharpLever"},
    {"G4", "G,A,BFlat,C,B,DSharpLever"},
    {"G#4", "G,A,BFlat,C,B,GSharpLever,DSharpLever"},
    {"A4", "A,BFlat,C,B,DSharpLever"},
    {"A#4", "BFlat,C,B,DSharpLever"},
    {"B4", "C,B,DSharpLever"},
    {"C5", "C,DSharpLever"},
    {"C#5", "DSharpLever"},
    {"D5", "D,E,F,G,A,BFlat,B,DSharpLever"},
    {"D#5", "D,E,F,G,A,BFlat,C,B,DSharpLever"},
    {"E5", "E,F,G,A,BFlat,C,B,DSharpLever"},
    {"F5", "F,G,A,BFlat,C,B,DSharpLever"},
    {"F#5", "D,G,A,BFlat,C,B,DSharpLever"},
    {"G5", "G,A,BFlat,C,B,DSharpLever"},
    {"G#5", "G,A,BFlat,C,B,GSharpLever,DSharpLever"},
    {"A5", "A,BFlat,C,B,DSharpLever"},
    {"A#5", "BFlat,C,B,DSharpLever"},
    {"B5", "C,B,DSharpLever"},
    {"C6", "C,DSharpLever"},
    {"C#6", "DSharpLever"},
    {"D6", "D,E,F,G,A,BFlat,B,DSharpLever"},
    {"D#6", "D,E,F,G,A,BFlat,C,B,DSharpLever"},
    {"E6", "E,F,A,BFlat,C,B,DSharpLever"},
    {"F6", "F,G,BFlat,C,B,DSharpLever"},
    {"F#6", "D,G,C,B,DSharpLever"},
    {"G6", "G,A,BFlat,C,DSharpLever"},
    {"G#6", "G,A,BFlat,C,GSharpLever,DSharpLever"},
    {"A6", "A,BFlat,F,C,B,DSharpLever"},
    {"A#6", "F,BFlat,C,B,DSharpTrillLever,DSharpLever"},
    {"B6", "C,B,DTrillLever,DSharpLever"},
    {"C7", "F,G,BFlat,C,DSharpLever"},
};

KeyMask parse_mask(const std::string& text) {
    KeyMask mask;
    if (text == "-") return mask;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        const auto key = key_id_from_name(token);
        if (!key)
            throw Error(ErrorCode::SyntaxError, "unknown key id '" + token + "'");
        mask.set(*key);
    }
    return mask;
}

} // namespace

FingeringTable::FingeringTable() {
    for (int i = 0; i < kNoteCount; ++i) {
        masks_[i] = parse_mask(kDefaultChart[i].mask);
        present_[i] = true;
    }
}

FingeringTable FingeringTable::parse(const std::string& text) {
    FingeringTable table;
    table.masks_.fill(KeyMask{});
    table.present_.fill(false);

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_comment(line);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;

        if (first == "version") {
            int v = 0;
            if (!(ls >> v) || v <= 0)
                throw Error(ErrorCode::SyntaxError,
                            "line " + std::to_string(line_no) + ": bad version");
            table.version_ = v;
            continue;
        }

        std::string mask_text;
        if (!(ls >> mask_text))
            throw Error(ErrorCode::SyntaxError,
                        "line " + std::to_string(line_no) + ": missing key list");
        std::string extra;
        if (ls >> extra)
            throw Error(ErrorCode::SyntaxError,
                        "line " + std::to_string(line_no) + ": trailing tokens");

        int midi;
        try {
            midi = note_name_to_midi(first);
        } catch (const Error&) {
            throw Error(ErrorCode::SyntaxError,
                        "line " + std::to_string(line_no) + ": bad note name '" + first + "'");
        }
        if (midi < kLowestNote || midi > kHighestNote)
            throw Error(ErrorCode::RangeError,
                        "line " + std::to_string(line_no) + ": note outside 60..96");
        try {
            table.masks_[midi - kLowestNote] = parse_mask(mask_text);
        } catch (const Error& e) {
            throw Error(ErrorCode::SyntaxError,
                        "line " + std::to_string(line_no) + ": " + e.what());
        }
        table.present_[midi - kLowestNote] = true;
    }

    for (int i = 0; i < kNoteCount; ++i)
        if (!table.present_[i])
            throw Error(ErrorCode::ConfigError,
                        "fingering table missing note " +
                            midi_to_note_name(kLowestNote + i));
    return table;
}

FingeringTable FingeringTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open fingering table '" + path + "'");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse(data);
}

std::string FingeringTable::serialize() const {
    std::ostringstream out;
    out << "# fingering table: <note-name> <comma-separated key ids>\n";
    out << "version " << version_ << "\n";
    for (int i = 0; i < kNoteCount; ++i)
        out << midi_to_note_name(kLowestNote + i) << " " << masks_[i].to_string() << "\n";
    return out.str();
}

void FingeringTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write fingering table '" + path + "'");
    out << serialize();
}

KeyMask FingeringTable::lookup(int midi_note) const {
    if (midi_note < kLowestNote || midi_note > kHighestNote)
        throw Error(ErrorCode::RangeError,
                    "note " + std::to_string(midi_note) + " outside playable range " +
                        std::to_string(kLowestNote) + ".." + std::to_string(kHighestNote));
    return masks_[midi_note - kLowestNote];
}

void FingeringTable::set(int midi_note, KeyMask mask) {
    if (midi_note < kLowestNote || midi_note > kHighestNote)
        throw Error(ErrorCode::RangeError, "note outside playable range");
    masks_[midi_note - kLowestNote] = mask;
    present_[midi_note - kLowestNote] = true;
}

std::optional<int> FingeringTable::find_note(KeyMask mask, int near_note) const {
    std::optional<int> best;
    int best_distance = 1 << 30;
    for (int i = 0; i < kNoteCount; ++i) {
        if (masks_[i] != mask) continue;
        const int note = kLowestNote + i;
        const int distance = std::abs(note - near_note);
        if (distance < best_distance) {
            best = note;
            best_distance = distance;
        }
    }
    return best;
}

KeyMask lookup_fingering(int midi_note, const FingeringTable& table) {
    return table.lookup(midi_note);
}

} // namespace flutesim
