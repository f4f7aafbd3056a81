#include "flutesim/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "flutesim/error.hpp"

namespace flutesim {

const char* actuation_kind_name(ActuationKind kind) {
    switch (kind) {
    case ActuationKind::KeyPress: return "key_press";
    case ActuationKind::KeyRelease: return "key_release";
    case ActuationKind::HeadRotateTo: return "head_rotate_to";
    case ActuationKind::HeadReturn: return "head_return";
    }
    return "?";
}

namespace {

// One transition's key events: travel starts together, placed so the
// slowest key's motion ends exactly at `complete_at`.
void emit_transition(std::vector<ActuationEvent>& events, KeyMask from, KeyMask to,
                     const ActuationProfile& profile, const SchedulerConfig& cfg,
                     double complete_at, int note_index) {
    const TransitionDiff diff = transition_diff(from, to);
    double slowest = 0.0;
    for (KeyId k : diff.press.keys())
        slowest = std::max(slowest, profile.latency(k).key_ms);
    for (KeyId k : diff.release.keys())
        slowest = std::max(slowest, profile.latency(k).key_ms);
    const double motion_start = complete_at - slowest;

    const auto emit = [&](KeyId key, ActuationKind kind) {
        const KeyLatency& lat = profile.latency(key);
        ActuationEvent ev;
        ev.kind = kind;
        ev.key = key;
        ev.motion_start_ms = motion_start;
        ev.motion_end_ms = motion_start + lat.key_ms;
        ev.motor_start_ms = motion_start - cfg.split_factor * (lat.motor_ms - lat.key_ms);
        ev.note_index = note_index;
        events.push_back(ev);
    };
    for (KeyId k : diff.press.keys()) emit(k, ActuationKind::KeyPress);
    for (KeyId k : diff.release.keys()) emit(k, ActuationKind::KeyRelease);
}

struct FeasibilityViolation {
    KeyId key;
    double required_ms;
    double available_ms;
    int note_index;
};

void sort_events(std::vector<ActuationEvent>& events) {
    std::stable_sort(events.begin(), events.end(),
                     [](const ActuationEvent& a, const ActuationEvent& b) {
                         if (a.motion_start_ms != b.motion_start_ms)
                             return a.motion_start_ms < b.motion_start_ms;
                         return a.motion_end_ms < b.motion_end_ms;
                     });
}

} // namespace

std::vector<ActuationEvent> schedule_head_joint(const Score& score,
                                                const ActuationProfile& profile,
                                                int low_register_max,
                                                double lead_in_ms) {
    std::vector<ActuationEvent> events;
    const double joint_ms = profile.head_joint_ms;
    const double motor_lead = profile.head_motor_ms - profile.head_joint_ms;

    const auto emit = [&](ActuationKind kind, int note_index, double complete_at) {
        ActuationEvent ev;
        ev.kind = kind;
        ev.angle_deg = kind == ActuationKind::HeadRotateTo ? profile.head_angle_deg : 0.0;
        ev.motion_end_ms = complete_at;
        ev.motion_start_ms = complete_at - joint_ms;
        ev.motor_start_ms = ev.motion_start_ms - motor_lead;
        ev.note_index = note_index;
        events.push_back(ev);
    };

    bool low_active = false;
    for (std::size_t i = 0; i < score.events.size(); ++i) {
        const NoteEvent& note = score.events[i];
        const bool is_low =
            classify_register(note.midi_note, low_register_max) == Register::Low;
        if (is_low == low_active) continue;

        const double onset = note.onset_ms + lead_in_ms;
        if (i > 0) {
            // Rotation is forbidden while a note sounds, so the joint travel
            // must fit in the silent gap before this onset.
            const double gap = note.onset_ms - score.events[i - 1].off_ms();
            if (gap < joint_ms - 1e-9)
                throw Error(ErrorCode::InfeasibleTiming,
                            "head joint rotation before note " + std::to_string(i) +
                                " needs a " + std::to_string(joint_ms) +
                                " ms gap, only " + std::to_string(gap) + " ms available");
        } else if (lead_in_ms < profile.head_motor_ms) {
            throw Error(ErrorCode::InfeasibleTiming,
                        "lead-in shorter than head motor movement time");
        }
        emit(is_low ? ActuationKind::HeadRotateTo : ActuationKind::HeadReturn,
             static_cast<int>(i), onset);
        low_active = is_low;
    }
    return events;
}

ActuationTimeline build_timeline(const Score& score, const FingeringTable& table,
                                 const ActuationProfile& profile,
                                 const SchedulerConfig& cfg) {
    validate_score(score);
    if (cfg.split_factor < 0.0 || cfg.split_factor > 1.0)
        throw Error(ErrorCode::DomainError, "split_factor must be in [0, 1]");
    if (cfg.lead_in_ms < 0.0)
        throw Error(ErrorCode::DomainError, "lead_in_ms must be non-negative");

    ActuationTimeline timeline;
    timeline.notes = score;
    timeline.lead_in_ms = cfg.lead_in_ms;
    if (score.events.empty()) return timeline;

    // Key-travel feasibility: a transition's slowest key must fit between
    // consecutive onsets. All violations are collected so the error names
    // the limiting key across the whole score.
    std::vector<FeasibilityViolation> violations;
    for (std::size_t i = 1; i < score.events.size(); ++i) {
        const KeyMask from = table.lookup(score.events[i - 1].midi_note);
        const KeyMask to = table.lookup(score.events[i].midi_note);
        const TransitionDiff diff = transition_diff(from, to);
        KeyId slowest{};
        double required = 0.0;
        for (KeyId k : diff.press.keys())
            if (profile.latency(k).key_ms > required) {
                required = profile.latency(k).key_ms;
                slowest = k;
            }
        for (KeyId k : diff.release.keys())
            if (profile.latency(k).key_ms > required) {
                required = profile.latency(k).key_ms;
                slowest = k;
            }
        const double available = score.events[i].onset_ms - score.events[i - 1].onset_ms;
        if (required > available + 1e-9)
            violations.push_back({slowest, required, available, static_cast<int>(i)});
    }
    if (!violations.empty()) {
        const auto worst = std::max_element(
            violations.begin(), violations.end(),
            [](const FeasibilityViolation& a, const FeasibilityViolation& b) {
                return a.required_ms < b.required_ms;
            });
        std::ostringstream msg;
        msg << key_id_name(worst->key) << " key needs " << worst->required_ms
            << " ms to move but only " << worst->available_ms
            << " ms separate notes " << worst->note_index - 1 << " and "
            << worst->note_index << " (" << violations.size() << " infeasible transition"
            << (violations.size() == 1 ? "" : "s") << " total)";
        throw Error(ErrorCode::InfeasibleTiming, msg.str());
    }

    // Initial fingering, scheduled backward from the first onset into the
    // lead-in window.
    const double first_onset = score.events.front().onset_ms + cfg.lead_in_ms;
    emit_transition(timeline.events, KeyMask{}, table.lookup(score.events[0].midi_note),
                    profile, cfg, first_onset, 0);
    for (const ActuationEvent& ev : timeline.events)
        if (ev.motor_start_ms < 0.0)
            throw Error(ErrorCode::InfeasibleTiming,
                        "lead-in shorter than the initial fingering setup");

    for (std::size_t i = 1; i < score.events.size(); ++i) {
        emit_transition(timeline.events, table.lookup(score.events[i - 1].midi_note),
                        table.lookup(score.events[i].midi_note), profile, cfg,
                        score.events[i].onset_ms + cfg.lead_in_ms, static_cast<int>(i));
    }

    if (cfg.include_head_joint) {
        const auto head = schedule_head_joint(score, profile, cfg.low_register_max,
                                              cfg.lead_in_ms);
        timeline.events.insert(timeline.events.end(), head.begin(), head.end());
    }

    sort_events(timeline.events);
    return timeline;
}

std::vector<Hazard> detect_transient_hazards(const ActuationTimeline& timeline,
                                             const FingeringTable& table,
                                             double threshold_ms) {
    if (threshold_ms < 0.0)
        throw Error(ErrorCode::DomainError, "threshold must be non-negative");

    struct Boundary {
        double time;
        KeyId key;
        bool press;
    };
    std::map<int, std::vector<Boundary>> transitions;
    for (const ActuationEvent& ev : timeline.events) {
        if (!ev.is_key_event() || ev.note_index < 1) continue;
        transitions[ev.note_index].push_back(
            {ev.motion_end_ms, *ev.key, ev.kind == ActuationKind::KeyPress});
    }

    std::vector<Hazard> hazards;
    for (auto& [note_index, boundaries] : transitions) {
        const int from_note = timeline.notes.events[note_index - 1].midi_note;
        const int to_note = timeline.notes.events[note_index].midi_note;
        const KeyMask source = table.lookup(from_note);
        const KeyMask dest = table.lookup(to_note);

        std::sort(boundaries.begin(), boundaries.end(),
                  [](const Boundary& a, const Boundary& b) { return a.time < b.time; });

        KeyMask mask = source;
        std::size_t i = 0;
        while (i < boundaries.size()) {
            // Apply every completion sharing this timestamp atomically.
            const double t = boundaries[i].time;
            while (i < boundaries.size() && boundaries[i].time <= t + 1e-9) {
                if (boundaries[i].press)
                    mask.set(boundaries[i].key);
                else
                    mask.clear(boundaries[i].key);
                ++i;
            }
            if (i >= boundaries.size()) break;
            if (mask == source || mask == dest) continue;
            const double window = boundaries[i].time - t;
            if (window > threshold_ms) {
                Hazard hz;
                hz.from_index = note_index - 1;
                hz.to_index = note_index;
                hz.transient_mask = mask;
                hz.sounding_as = table.find_note(mask, from_note);
                hz.window_ms = window;
                hz.start_ms = t;
                hazards.push_back(hz);
            }
        }
    }
    return hazards;
}

long max_bpm(double limit_ms, NoteValue value) {
    if (!(limit_ms > 0.0))
        throw Error(ErrorCode::DomainError, "movement-time limit must be positive");
    int subdivisions = 1;
    switch (value) {
    case NoteValue::Quarter: subdivisions = 1; break;
    case NoteValue::Eighth: subdivisions = 2; break;
    case NoteValue::Sixteenth: subdivisions = 4; break;
    }
    const double bpm = 60000.0 / (limit_ms * subdivisions);
    return static_cast<long>(std::floor(bpm + 0.5));
}

double measure_duration_s(double limit_ms) {
    if (!(limit_ms > 0.0))
        throw Error(ErrorCode::DomainError, "movement-time limit must be positive");
    return 4.0 * limit_ms / 1000.0;
}

std::string timeline_to_jsonl(const ActuationTimeline& timeline) {
    std::string out;
    char line[256];
    for (const ActuationEvent& ev : timeline.events) {
        if (ev.is_key_event()) {
            std::snprintf(line, sizeof(line),
                          "{\"kind\":\"%s\",\"target\":\"%s\",\"motor_start_ms\":%.2f,"
                          "\"motion_start_ms\":%.2f,\"motion_end_ms\":%.2f}\n",
                          actuation_kind_name(ev.kind), key_id_name(*ev.key),
                          ev.motor_start_ms, ev.motion_start_ms, ev.motion_end_ms);
        } else {
            std::snprintf(line, sizeof(line),
                          "{\"kind\":\"%s\",\"target\":%.2f,\"motor_start_ms\":%.2f,"
                          "\"motion_start_ms\":%.2f,\"motion_end_ms\":%.2f}\n",
                          actuation_kind_name(ev.kind), ev.angle_deg, ev.motor_start_ms,
                          ev.motion_start_ms, ev.motion_end_ms);
        }
        out += line;
    }
    return out;
}

} // namespace flutesim
