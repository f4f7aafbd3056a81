#include "flutesim/score_io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include "flutesim/error.hpp"
#include "text_util.hpp"

namespace flutesim {

namespace {

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    bool eof() const { return pos_ >= bytes_.size(); }
    std::size_t pos() const { return pos_; }

    std::uint8_t u8() {
        if (pos_ >= bytes_.size())
            throw Error(ErrorCode::MalformedFile, "unexpected end of file");
        return bytes_[pos_++];
    }

    std::uint16_t u16() { return std::uint16_t(u8() << 8 | u8()); }

    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = v << 8 | u8();
        return v;
    }

    std::uint32_t varint() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            const std::uint8_t b = u8();
            v = v << 7 | (b & 0x7F);
            if (!(b & 0x80)) return v;
        }
        throw Error(ErrorCode::MalformedFile, "variable-length quantity too long");
    }

    void skip(std::size_t n) {
        if (pos_ + n > bytes_.size())
            throw Error(ErrorCode::MalformedFile, "chunk overruns file");
        pos_ += n;
    }

    bool expect_tag(const char* tag) {
        if (pos_ + 4 > bytes_.size()) return false;
        const bool ok = std::memcmp(bytes_.data() + pos_, tag, 4) == 0;
        pos_ += 4;
        return ok;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

struct RawNoteEvent {
    std::uint32_t tick = 0;
    bool on = false;
    std::uint8_t note = 0;
    std::uint8_t velocity = 0;
};

// Converts an absolute tick to milliseconds under a sorted tempo map.
class TickClock {
public:
    TickClock(const std::vector<TempoChange>& map, int tpq) : tpq_(tpq) {
        double ms = 0.0;
        std::uint32_t tick = 0;
        std::uint32_t uspq = 500000;
        for (const TempoChange& tc : map) {
            ms += double(tc.tick - tick) * uspq / (1000.0 * tpq_);
            tick = tc.tick;
            uspq = tc.microseconds_per_quarter;
            segments_.push_back({tick, ms, uspq});
        }
        if (segments_.empty() || segments_.front().tick != 0)
            segments_.insert(segments_.begin(), {0, 0.0, 500000});
    }

    double ms_at(std::uint32_t tick) const {
        const Segment* seg = &segments_.front();
        for (const Segment& s : segments_) {
            if (s.tick > tick) break;
            seg = &s;
        }
        return seg->start_ms + double(tick - seg->tick) * seg->uspq / (1000.0 * tpq_);
    }

private:
    struct Segment {
        std::uint32_t tick;
        double start_ms;
        std::uint32_t uspq;
    };
    std::vector<Segment> segments_;
    int tpq_;
};

void parse_track(ByteReader& r, std::vector<RawNoteEvent>& notes,
                 std::vector<TempoChange>& tempos) {
    if (!r.expect_tag("MTrk"))
        throw Error(ErrorCode::MalformedFile, "missing MTrk chunk");
    const std::uint32_t length = r.u32();
    const std::size_t track_end = r.pos() + length;

    std::uint32_t tick = 0;
    std::uint8_t running_status = 0;
    while (r.pos() < track_end) {
        tick += r.varint();
        std::uint8_t status = r.u8();
        bool have_first_data = false;
        std::uint8_t first_data = 0;
        if (!(status & 0x80)) {
            if (!(running_status & 0x80))
                throw Error(ErrorCode::MalformedFile, "data byte without running status");
            first_data = status;
            have_first_data = true;
            status = running_status;
        }
        const auto next_data = [&]() -> std::uint8_t {
            if (have_first_data) {
                have_first_data = false;
                return first_data;
            }
            return r.u8();
        };
        const std::uint8_t kind = status & 0xF0;
        switch (kind) {
        case 0x80:
        case 0x90: {
            running_status = status;
            const std::uint8_t note = next_data();
            const std::uint8_t vel = next_data();
            const bool on = kind == 0x90 && vel > 0;
            notes.push_back({tick, on, note, vel});
            break;
        }
        case 0xA0:
        case 0xB0:
        case 0xE0:
            running_status = status;
            next_data();
            next_data();
            break;
        case 0xC0:
        case 0xD0:
            running_status = status;
            next_data();
            break;
        case 0xF0:
            running_status = 0;
            if (status == 0xFF) {
                const std::uint8_t type = r.u8();
                const std::uint32_t len = r.varint();
                if (type == 0x51) {
                    if (len != 3)
                        throw Error(ErrorCode::MalformedFile, "bad tempo meta length");
                    std::uint32_t uspq = 0;
                    for (int i = 0; i < 3; ++i) uspq = uspq << 8 | r.u8();
                    tempos.push_back({tick, uspq});
                } else if (type == 0x2F) {
                    r.skip(len);
                    if (r.pos() != track_end)
                        throw Error(ErrorCode::MalformedFile,
                                    "end-of-track before chunk boundary");
                    return;
                } else {
                    r.skip(len);
                }
            } else if (status == 0xF0 || status == 0xF7) {
                r.skip(r.varint());
            } else {
                throw Error(ErrorCode::MalformedFile, "unexpected system message");
            }
            break;
        default:
            throw Error(ErrorCode::MalformedFile, "bad status byte");
        }
    }
    if (r.pos() != track_end)
        throw Error(ErrorCode::MalformedFile, "event overruns track chunk");
}

} // namespace

Score parse_midi(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    if (!r.expect_tag("MThd"))
        throw Error(ErrorCode::MalformedFile, "missing MThd header");
    if (r.u32() != 6)
        throw Error(ErrorCode::MalformedFile, "bad MThd length");
    const std::uint16_t format = r.u16();
    const std::uint16_t ntrks = r.u16();
    const std::uint16_t division = r.u16();
    if (format > 1)
        throw Error(ErrorCode::UnsupportedFormat,
                    "SMF format " + std::to_string(format) + " not supported");
    if (division & 0x8000)
        throw Error(ErrorCode::UnsupportedFormat, "SMPTE time division not supported");
    if (division == 0)
        throw Error(ErrorCode::MalformedFile, "zero ticks per quarter");
    if (format == 0 && ntrks != 1)
        throw Error(ErrorCode::MalformedFile, "format 0 file must have one track");

    std::vector<RawNoteEvent> raw;
    std::vector<TempoChange> tempos;
    for (std::uint16_t t = 0; t < ntrks; ++t) parse_track(r, raw, tempos);

    std::stable_sort(tempos.begin(), tempos.end(),
                     [](const TempoChange& a, const TempoChange& b) { return a.tick < b.tick; });
    // Note-offs sort before note-ons at the same tick, so contiguous notes
    // do not register as overlapping.
    std::stable_sort(raw.begin(), raw.end(), [](const RawNoteEvent& a, const RawNoteEvent& b) {
        if (a.tick != b.tick) return a.tick < b.tick;
        return !a.on && b.on;
    });

    const TickClock clock(tempos, division);

    Score score;
    score.ticks_per_quarter = division;
    score.tempo_map = tempos;

    bool active = false;
    RawNoteEvent current{};
    for (const RawNoteEvent& ev : raw) {
        if (ev.on) {
            if (active)
                throw Error(ErrorCode::PolyphonyError,
                            "simultaneous notes " + std::to_string(current.note) + " and " +
                                std::to_string(ev.note));
            active = true;
            current = ev;
        } else {
            if (!active || ev.note != current.note) continue; // stray note-off
            const double onset = clock.ms_at(current.tick);
            const double off = clock.ms_at(ev.tick);
            if (off - onset < 1.0)
                throw Error(ErrorCode::DomainError,
                            "note shorter than 1 ms at tick " + std::to_string(current.tick));
            score.events.push_back(
                {current.note, onset, off - onset, current.velocity});
            active = false;
        }
    }
    if (active)
        throw Error(ErrorCode::MalformedFile,
                    "note-on without matching note-off (note " +
                        std::to_string(current.note) + ")");

    validate_score(score);
    return score;
}

Score parse_text_score(const std::string& text) {
    Score score;
    score.ticks_per_quarter = 480;
    score.tempo_map = {{0, 500000}};

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    double cursor_ms = 0.0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_comment(line);
        std::istringstream ls(line);
        std::string name;
        if (!(ls >> name)) continue; // blank or comment-only line

        double duration = 0.0;
        if (!(ls >> duration))
            throw Error(ErrorCode::SyntaxError,
                        "line " + std::to_string(line_no) + ": missing duration");
        if (!(duration > 0.0))
            throw Error(ErrorCode::SyntaxError,
                        "line " + std::to_string(line_no) + ": duration must be positive");

        if (name == "R" || name == "r") {
            std::string extra;
            if (ls >> extra)
                throw Error(ErrorCode::SyntaxError,
                            "line " + std::to_string(line_no) + ": trailing tokens");
            cursor_ms += duration;
            continue;
        }

        int velocity = 64;
        std::string vel_token;
        if (ls >> vel_token) {
            try {
                velocity = std::stoi(vel_token);
            } catch (const std::exception&) {
                throw Error(ErrorCode::SyntaxError,
                            "line " + std::to_string(line_no) + ": bad velocity");
            }
            if (velocity < 1 || velocity > 127)
                throw Error(ErrorCode::SyntaxError,
                            "line " + std::to_string(line_no) + ": velocity out of range");
            std::string extra;
            if (ls >> extra)
                throw Error(ErrorCode::SyntaxError,
                            "line " + std::to_string(line_no) + ": trailing tokens");
        }

        int midi;
        try {
            midi = note_name_to_midi(name);
        } catch (const Error&) {
            throw Error(ErrorCode::SyntaxError,
                        "line " + std::to_string(line_no) + ": bad note name '" + name + "'");
        }
        score.events.push_back({midi, cursor_ms, duration, velocity});
        cursor_ms += duration;
    }

    validate_score(score);
    return score;
}

std::string serialize_text_score(const Score& score) {
    std::ostringstream out;
    out << "# flutesim text score\n";
    double cursor = 0.0;
    for (const NoteEvent& e : score.events) {
        if (e.onset_ms > cursor + 1e-9)
            out << "R " << (e.onset_ms - cursor) << "\n";
        out << midi_to_note_name(e.midi_note) << " " << e.duration_ms << " " << e.velocity
            << "\n";
        cursor = e.off_ms();
    }
    return out.str();
}

Score load_score_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open score file '" + path + "'");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() >= 4 && data.compare(0, 4, "MThd") == 0) {
        return parse_midi(std::span<const std::uint8_t>(
            reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
    }
    return parse_text_score(data);
}

} // namespace flutesim
