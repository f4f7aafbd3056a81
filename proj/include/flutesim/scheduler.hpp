#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flutesim/actuation_profile.hpp"
#include "flutesim/fingering.hpp"
#include "flutesim/score.hpp"

namespace flutesim {

struct SchedulerConfig {
    int low_register_max = 73;  // C#5: top of the fundamental-mode register
    int high_register_min = 94;
    double split_factor = 1.0;  // fraction of (motor - key) spent before key travel
    double lead_in_ms = 500.0;  // pad before the first onset for initial setup
    double hazard_threshold_ms = 50.0;
    bool include_head_joint = true;
};

enum class ActuationKind { KeyPress, KeyRelease, HeadRotateTo, HeadReturn };

const char* actuation_kind_name(ActuationKind kind);

/// One scheduled motor action. All timestamps are in timeline (audio) time,
/// i.e. score time shifted by lead_in_ms. The motor starts at motor_start_ms,
/// the driven part travels over [motion_start_ms, motion_end_ms].
struct ActuationEvent {
    ActuationKind kind = ActuationKind::KeyPress;
    std::optional<KeyId> key;      // set for key events
    double angle_deg = 0.0;        // set for head events
    double motor_start_ms = 0.0;
    double motion_start_ms = 0.0;
    double motion_end_ms = 0.0;
    int note_index = -1;           // index of the note this event prepares

    bool is_key_event() const {
        return kind == ActuationKind::KeyPress || kind == ActuationKind::KeyRelease;
    }
    bool is_head_event() const { return !is_key_event(); }
};

/// Fully timed actuation plan for a score.
struct ActuationTimeline {
    std::vector<ActuationEvent> events; // ordered by motion_start, then end
    Score notes;                        // source score (score time)
    double lead_in_ms = 0.0;

    double note_onset(int index) const { return notes.events[index].onset_ms + lead_in_ms; }
    double note_off(int index) const { return notes.events[index].off_ms() + lead_in_ms; }
};

/// An intermediate key state during a transition that persists long enough
/// to matter. sounding_as is set when the transient mask matches a table
/// fingering (i.e. it would sound a wrong pitch rather than no pitch).
struct Hazard {
    int from_index = 0;
    int to_index = 0;
    KeyMask transient_mask;
    std::optional<int> sounding_as;
    double window_ms = 0.0;
    double start_ms = 0.0; // timeline time at which the transient mask forms
};

/// Builds the timed plan: for every transition the changed keys start their
/// travel together, placed backward from the next onset so the slowest key's
/// motion ends exactly on it. motor_start precedes motion_start by
/// split_factor * (motor_ms - key_ms). Head-joint rotations are inserted on
/// low-register boundaries (see schedule_head_joint).
///
/// Throws InfeasibleTiming naming the limiting key when a transition cannot
/// fit in the available onset spacing, or when a required head rotation does
/// not fit in a silent gap.
ActuationTimeline build_timeline(const Score& score, const FingeringTable& table,
                                 const ActuationProfile& profile,
                                 const SchedulerConfig& cfg);

/// Head-joint events alone: a rotation to the low-register angle before the
/// first note of each maximal low-register run, a return before the first
/// following non-low note. Joint motion takes head_joint_ms and must fit in
/// the silent gap before the target note; the motor leads the joint motion
/// by head_motor_ms - head_joint_ms.
std::vector<ActuationEvent> schedule_head_joint(const Score& score,
                                                const ActuationProfile& profile,
                                                int low_register_max,
                                                double lead_in_ms);

/// Sweeps each transition's completion boundaries: the instantaneous mask is
/// the old mask plus completed presses minus completed releases. Any
/// intermediate mask that differs from both endpoints and persists longer
/// than threshold_ms is reported.
std::vector<Hazard> detect_transient_hazards(const ActuationTimeline& timeline,
                                             const FingeringTable& table,
                                             double threshold_ms);

enum class NoteValue { Quarter, Eighth, Sixteenth };

/// Tempo ceiling imposed by one actuator's travel time: the fastest BPM at
/// which consecutive notes of the given value stay `limit_ms` apart.
/// Rounded half-up; may round to 0 for degenerate limits (reported by the
/// CLI as infeasible). Throws DomainError for non-positive limit_ms.
long max_bpm(double limit_ms, NoteValue value);

/// One 4/4 measure at the limiting rate, in seconds (4 * limit_ms).
double measure_duration_s(double limit_ms);

/// Line-delimited JSON export, one record per event, timestamps with two
/// decimal places.
std::string timeline_to_jsonl(const ActuationTimeline& timeline);

} // namespace flutesim
