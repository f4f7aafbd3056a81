#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flutesim/score.hpp"

namespace flutesim {

/// The 14 independently actuated keys and levers, one per servo.
/// Keys close their tone holes when pressed; levers open a linked,
/// normally-closed pad (D#/G# pads and the two trill pads).
enum class KeyId : std::uint8_t {
    LowC,
    CSharp,
    DSharpLever,
    D,
    DSharpTrillLever,
    E,
    DTrillLever,
    F,
    GSharpLever,
    G,
    A,
    BFlat,
    C,
    B,
};

inline constexpr int kKeyCount = 14;

const char* key_id_name(KeyId key);
std::optional<KeyId> key_id_from_name(const std::string& name);

/// Set of engaged keys/levers for one fingering, packed into 14 bits.
class KeyMask {
public:
    constexpr KeyMask() = default;
    constexpr explicit KeyMask(std::uint16_t bits) : bits_(bits & kAllBits) {}
    KeyMask(std::initializer_list<KeyId> keys) {
        for (KeyId k : keys) set(k);
    }

    void set(KeyId key) { bits_ |= bit(key); }
    void clear(KeyId key) { bits_ &= ~bit(key); }
    bool contains(KeyId key) const { return (bits_ & bit(key)) != 0; }
    bool empty() const { return bits_ == 0; }
    int count() const;

    std::uint16_t bits() const { return bits_; }

    KeyMask operator|(KeyMask other) const { return KeyMask(std::uint16_t(bits_ | other.bits_)); }
    KeyMask operator&(KeyMask other) const { return KeyMask(std::uint16_t(bits_ & other.bits_)); }
    /// Set difference: keys in *this but not in other.
    KeyMask minus(KeyMask other) const { return KeyMask(std::uint16_t(bits_ & ~other.bits_)); }

    bool operator==(const KeyMask&) const = default;

    std::vector<KeyId> keys() const;
    std::string to_string() const; // comma-separated key names, "-" if empty

private:
    static constexpr std::uint16_t kAllBits = (1u << kKeyCount) - 1;
    static constexpr std::uint16_t bit(KeyId key) {
        return std::uint16_t(1u << static_cast<unsigned>(key));
    }
    std::uint16_t bits_ = 0;
};

enum class Register { Low, Middle, High };

const char* register_name(Register reg);

/// Low iff note <= low_register_max, High iff note >= high_register_min.
/// Total and monotone over the playable range. Throws RangeError.
Register classify_register(int midi_note, int low_register_max = 73,
                           int high_register_min = 94);

/// Press/release difference between two fingerings.
struct TransitionDiff {
    KeyMask press;   // to \ from
    KeyMask release; // from \ to
};

TransitionDiff transition_diff(KeyMask from, KeyMask to);

/// Total mapping from midi note 60..96 to its key mask.
///
/// The default table (data/boehm_fingerings.txt) is a standard Boehm
/// covered-key chart transcribed actuator-by-actuator: pads that a human
/// player closes through the instrument's clutches (the Bb pad, the foot
/// C# pad under the low-C roller) appear explicitly, since the robot gives
/// every pad group its own servo.
class FingeringTable {
public:
    FingeringTable();

    static FingeringTable load(const std::string& path);
    static FingeringTable parse(const std::string& text);

    std::string serialize() const;
    void save(const std::string& path) const;

    /// Throws RangeError outside 60..96.
    KeyMask lookup(int midi_note) const;
    void set(int midi_note, KeyMask mask);

    /// Reverse lookup. Fingerings are shared between registers, so ties are
    /// broken toward the note nearest to `near_note`.
    std::optional<int> find_note(KeyMask mask, int near_note) const;

    int version() const { return version_; }
    void set_version(int v) { version_ = v; }

private:
    std::array<KeyMask, kNoteCount> masks_{};
    std::array<bool, kNoteCount> present_{};
    int version_ = 1;
};

/// Throws RangeError outside 60..96; otherwise returns the table's mask.
KeyMask lookup_fingering(int midi_note, const FingeringTable& table);

} // namespace flutesim
