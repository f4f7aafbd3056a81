#include <doctest.h>

#include <algorithm>
#include <functional>
#include <random>

#include "flutesim/error.hpp"
#include "flutesim/scheduler.hpp"

using namespace flutesim;

namespace {

bool throws_with(ErrorCode code, std::string* message, const std::function<void()>& body) {
    try {
        body();
    } catch (const Error& e) {
        if (message) *message = e.what();
        return e.code() == code;
    }
    return false;
}

Score make_score(const std::vector<int>& notes, double spacing_ms, double duration_ms) {
    Score score;
    for (std::size_t i = 0; i < notes.size(); ++i)
        score.events.push_back({notes[i], spacing_ms * double(i), duration_ms, 96});
    return score;
}

ActuationProfile paper_profile() {
    return ActuationProfile::load("profiles/paper_table1.profile");
}

std::vector<int> chromatic_notes() {
    std::vector<int> notes;
    for (int n = 60; n <= 96; ++n) notes.push_back(n);
    return notes;
}

} // namespace

TEST_CASE("the shipped profile matches its table") {
    const ActuationProfile profile = paper_profile();
    CHECK(profile.latency(KeyId::E).motor_ms == doctest::Approx(96.67));
    CHECK(profile.latency(KeyId::E).key_ms == doctest::Approx(77.50));
    CHECK(profile.latency(KeyId::B).motor_ms == doctest::Approx(48.75));
    CHECK(profile.latency(KeyId::B).key_ms == doctest::Approx(45.42));
    CHECK(profile.slowest_key() == KeyId::E);
    CHECK(profile.head_motor_ms == doctest::Approx(73.33));
    CHECK(profile.head_joint_ms == doctest::Approx(40.00));
    CHECK(profile.head_angle_deg == doctest::Approx(22.0));
    for (int i = 0; i < kKeyCount; ++i)
        CHECK(profile.keys[i].motor_ms >= profile.keys[i].key_ms);
}

TEST_CASE("profile parsing rejects a missing key row") {
    const ActuationProfile profile = paper_profile();
    std::string text = profile.serialize();
    const auto pos = text.find("\nA ");
    text.erase(pos, text.find('\n', pos + 1) - pos);
    std::string msg;
    CHECK(throws_with(ErrorCode::ConfigError, &msg,
                      [&] { ActuationProfile::parse(text); }));
    CHECK(msg.find("'A'") != std::string::npos);
}

TEST_CASE("an isolated E-key press is scheduled backward from the onset") {
    // Custom two-entry table so the transition presses exactly one key.
    FingeringTable table;
    table.set(60, KeyMask{KeyId::C});
    table.set(61, KeyMask{KeyId::C, KeyId::E});
    const Score score = make_score({60, 61}, 500.0, 400.0);
    SchedulerConfig cfg;

    const ActuationTimeline timeline =
        build_timeline(score, table, paper_profile(), cfg);

    const ActuationEvent* press = nullptr;
    for (const ActuationEvent& ev : timeline.events)
        if (ev.note_index == 1 && ev.kind == ActuationKind::KeyPress) press = &ev;
    REQUIRE(press != nullptr);
    CHECK(*press->key == KeyId::E);
    const double onset = 500.0 + cfg.lead_in_ms;
    CHECK(press->motion_end_ms == doctest::Approx(onset));
    CHECK(press->motion_start_ms == doctest::Approx(onset - 77.50));
    CHECK(press->motor_start_ms == doctest::Approx(onset - 77.50 - (96.67 - 77.50)));
}

TEST_CASE("split factor moves the motor lead") {
    FingeringTable table;
    table.set(60, KeyMask{KeyId::C});
    table.set(61, KeyMask{KeyId::C, KeyId::E});
    SchedulerConfig cfg;
    cfg.split_factor = 0.5;
    const ActuationTimeline timeline =
        build_timeline(make_score({60, 61}, 500.0, 400.0), table, paper_profile(), cfg);
    for (const ActuationEvent& ev : timeline.events)
        if (ev.note_index == 1)
            CHECK(ev.motor_start_ms ==
                  doctest::Approx(ev.motion_start_ms - 0.5 * (96.67 - 77.50)));
}

TEST_CASE("timeline keeps every press finished by its note onset") {
    const FingeringTable table;
    const Score score = make_score(chromatic_notes(), 500.0, 450.0);
    const ActuationTimeline timeline =
        build_timeline(score, table, paper_profile(), SchedulerConfig{});

    // max motion end per transition lands exactly on the onset
    std::vector<double> max_end(score.events.size(), -1.0);
    for (const ActuationEvent& ev : timeline.events) {
        if (!ev.is_key_event()) continue;
        CHECK(ev.motor_start_ms <= ev.motion_start_ms);
        CHECK(ev.motion_start_ms < ev.motion_end_ms);
        if (ev.kind == ActuationKind::KeyPress)
            CHECK(ev.motion_end_ms <=
                  timeline.note_onset(ev.note_index) + 1e-9);
        max_end[ev.note_index] = std::max(max_end[ev.note_index], ev.motion_end_ms);
    }
    for (std::size_t i = 0; i < score.events.size(); ++i) {
        if (max_end[i] < 0.0) continue; // no key change for this note
        CHECK(max_end[i] == doctest::Approx(timeline.note_onset(int(i))));
    }
}

TEST_CASE("a 50 ms chromatic is infeasible and the E key is the limit") {
    const FingeringTable table;
    const Score score = make_score(chromatic_notes(), 50.0, 45.0);
    std::string msg;
    CHECK(throws_with(ErrorCode::InfeasibleTiming, &msg, [&] {
        build_timeline(score, table, paper_profile(), SchedulerConfig{});
    }));
    CHECK(msg.find("E key") != std::string::npos);
    CHECK(msg.find("77.5") != std::string::npos);
}

TEST_CASE("single-note score sets up during the lead-in") {
    const FingeringTable table;
    const Score score = make_score({60}, 500.0, 400.0); // C4 is low register
    SchedulerConfig cfg;
    const ActuationTimeline timeline = build_timeline(score, table, paper_profile(), cfg);

    int rotates = 0, returns = 0;
    for (const ActuationEvent& ev : timeline.events) {
        CHECK(ev.motion_end_ms <= cfg.lead_in_ms + 1e-9);
        CHECK(ev.motor_start_ms >= 0.0);
        if (ev.kind == ActuationKind::HeadRotateTo) ++rotates;
        if (ev.kind == ActuationKind::HeadReturn) ++returns;
    }
    CHECK(rotates == 1);
    CHECK(returns == 0);
}

TEST_CASE("head joint events follow low-register runs") {
    const ActuationProfile profile = paper_profile();
    // Low, Low, Mid x5, Low x5 with 50/100 ms gaps (detached articulation).
    Score score;
    const int notes[12] = {71, 71, 76, 78, 79, 78, 76, 73, 73, 66, 71, 71};
    const double onsets[12] = {0,    500,  1000, 1500, 2000, 3000,
                               3500, 4000, 5000, 5500, 6000, 7000};
    const double durs[12] = {450, 450, 450, 450, 900, 450, 450, 900, 450, 450, 900, 900};
    for (int i = 0; i < 12; ++i) score.events.push_back({notes[i], onsets[i], durs[i], 96});

    const auto events = schedule_head_joint(score, profile, 73, 500.0);
    REQUIRE(events.size() == 3);

    CHECK(events[0].kind == ActuationKind::HeadRotateTo);
    CHECK(events[0].note_index == 0);
    CHECK(events[0].angle_deg == doctest::Approx(22.0));
    CHECK(events[1].kind == ActuationKind::HeadReturn);
    CHECK(events[1].note_index == 2);
    CHECK(events[2].kind == ActuationKind::HeadRotateTo);
    CHECK(events[2].note_index == 7);

    for (const ActuationEvent& ev : events) {
        CHECK(ev.motion_end_ms - ev.motion_start_ms == doctest::Approx(40.00));
        CHECK(ev.motion_start_ms - ev.motor_start_ms == doctest::Approx(33.33));
        CHECK(ev.motion_end_ms ==
              doctest::Approx(score.events[ev.note_index].onset_ms + 500.0));
    }
}

TEST_CASE("head state matches the register during every sounding interval") {
    // Rebuild the piecewise head state from the timeline and sample it at
    // note midpoints; rotations must also never overlap sounding intervals.
    const FingeringTable table;
    Score score;
    const int notes[12] = {71, 71, 76, 78, 79, 78, 76, 73, 73, 66, 71, 71};
    const double onsets[12] = {0,    500,  1000, 1500, 2000, 3000,
                               3500, 4000, 5000, 5500, 6000, 7000};
    const double durs[12] = {450, 450, 450, 450, 900, 450, 450, 900, 450, 450, 900, 900};
    for (int i = 0; i < 12; ++i) score.events.push_back({notes[i], onsets[i], durs[i], 96});
    SchedulerConfig cfg;
    const ActuationTimeline timeline = build_timeline(score, table, paper_profile(), cfg);

    const auto head_angle_at = [&](double t_ms) {
        double angle = 0.0;
        for (const ActuationEvent& ev : timeline.events) {
            if (!ev.is_head_event() || ev.motion_end_ms > t_ms) continue;
            angle = ev.kind == ActuationKind::HeadRotateTo ? ev.angle_deg : 0.0;
        }
        return angle;
    };

    for (int i = 0; i < 12; ++i) {
        const double mid = timeline.note_onset(i) + durs[i] / 2.0;
        const bool low = classify_register(notes[i], cfg.low_register_max) == Register::Low;
        CHECK(head_angle_at(mid) == doctest::Approx(low ? 22.0 : 0.0));
    }
    for (const ActuationEvent& ev : timeline.events) {
        if (!ev.is_head_event()) continue;
        for (int i = 0; i < 12; ++i) {
            const bool overlaps = ev.motion_start_ms < timeline.note_off(i) - 1e-9 &&
                                  ev.motion_end_ms > timeline.note_onset(i) + 1e-9;
            CHECK(!overlaps);
        }
    }
}

TEST_CASE("head rotation cannot happen while a note sounds") {
    const ActuationProfile profile = paper_profile();
    // Contiguous notes leave no silent gap for the 40 ms rotation.
    const Score score = make_score({71, 76}, 500.0, 500.0);
    CHECK(throws_with(ErrorCode::InfeasibleTiming, nullptr,
                      [&] { schedule_head_joint(score, profile, 73, 500.0); }));
}

TEST_CASE("all-low scores rotate once and never return") {
    const ActuationProfile profile = paper_profile();
    const Score score = make_score({60, 62, 64, 65}, 500.0, 450.0);
    const auto events = schedule_head_joint(score, profile, 73, 500.0);
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == ActuationKind::HeadRotateTo);
}

TEST_CASE("identical completion times produce no hazards") {
    // Uniform profile: every changed key completes together, so the mask
    // flips atomically even on a mixed press/release transition.
    const FingeringTable table;
    const Score score = make_score({65, 66}, 500.0, 450.0); // F4 -> F#4
    const ActuationProfile uniform = ActuationProfile::uniform(90.0, 60.0);
    const ActuationTimeline timeline =
        build_timeline(score, table, uniform, SchedulerConfig{});
    CHECK(detect_transient_hazards(timeline, table, 0.0).empty());
}

TEST_CASE("repeated notes have no transition and no hazard") {
    const FingeringTable table;
    const Score score = make_score({69, 69}, 500.0, 450.0);
    const ActuationTimeline timeline =
        build_timeline(score, table, paper_profile(), SchedulerConfig{});
    CHECK(detect_transient_hazards(timeline, table, 0.0).empty());
}

TEST_CASE("F4 to F#4 exposes a transient G4 fingering") {
    const FingeringTable table;
    const Score score = make_score({65, 66}, 500.0, 450.0);
    const ActuationTimeline timeline =
        build_timeline(score, table, paper_profile(), SchedulerConfig{});

    // F releases 68.75 ms after travel starts, D lands at 70.42 ms: the
    // 1.67 ms in between sounds the G4 fingering.
    const auto hazards = detect_transient_hazards(timeline, table, 1.0);
    REQUIRE(hazards.size() == 1);
    CHECK(hazards[0].from_index == 0);
    CHECK(hazards[0].to_index == 1);
    CHECK(hazards[0].window_ms == doctest::Approx(70.42 - 68.75));
    REQUIRE(hazards[0].sounding_as.has_value());
    CHECK(*hazards[0].sounding_as == 67);

    CHECK(detect_transient_hazards(timeline, table, 2.0).empty());
}

TEST_CASE("uniform profiles are hazard-free over the whole chromatic") {
    const FingeringTable table;
    const Score score = make_score(chromatic_notes(), 500.0, 450.0);
    for (const double key_ms : {20.0, 60.0, 120.0}) {
        const ActuationProfile uniform = ActuationProfile::uniform(key_ms + 30.0, key_ms);
        const ActuationTimeline timeline =
            build_timeline(score, table, uniform, SchedulerConfig{});
        CHECK(detect_transient_hazards(timeline, table, 0.0).empty());
    }
}

TEST_CASE("uniform profiles are hazard-free on random fingering sequences") {
    const FingeringTable table;
    const ActuationProfile uniform = ActuationProfile::uniform(80.0, 55.0);
    std::mt19937 rng(23);
    for (int iter = 0; iter < 30; ++iter) {
        std::vector<int> notes;
        const int n = 2 + int(rng() % 10);
        for (int i = 0; i < n; ++i) notes.push_back(int(74 + rng() % 20)); // middle only
        const Score score = make_score(notes, 300.0, 250.0);
        const ActuationTimeline timeline =
            build_timeline(score, table, uniform, SchedulerConfig{});
        CHECK(detect_transient_hazards(timeline, table, 0.0).empty());
    }
}

TEST_CASE("max BPM tables reproduce the published limits") {
    // Fingering mechanism, limited by the E key at 77.50 ms.
    CHECK(max_bpm(77.50, NoteValue::Quarter) == 774);
    CHECK(max_bpm(77.50, NoteValue::Eighth) == 387);
    CHECK(max_bpm(77.50, NoteValue::Sixteenth) == 194);
    CHECK(measure_duration_s(77.50) == doctest::Approx(0.31));

    // Head joint, limited by the 40.00 ms rotation.
    CHECK(max_bpm(40.00, NoteValue::Quarter) == 1500);
    CHECK(max_bpm(40.00, NoteValue::Eighth) == 750);
    CHECK(max_bpm(40.00, NoteValue::Sixteenth) == 375);
    CHECK(measure_duration_s(40.00) == doctest::Approx(0.16));

    CHECK(max_bpm(60000.0, NoteValue::Quarter) == 1);
    CHECK(max_bpm(60000.0, NoteValue::Eighth) == 1);   // 0.5 rounds half-up
    CHECK(max_bpm(60000.0, NoteValue::Sixteenth) == 0); // guarded by the CLI
    CHECK(throws_with(ErrorCode::DomainError, nullptr,
                      [] { max_bpm(0.0, NoteValue::Quarter); }));
}

TEST_CASE("timeline export is line-delimited JSON with 2-decimal times") {
    FingeringTable table;
    table.set(60, KeyMask{KeyId::C});
    table.set(61, KeyMask{KeyId::C, KeyId::E});
    const ActuationTimeline timeline = build_timeline(
        make_score({60, 61}, 500.0, 400.0), table, paper_profile(), SchedulerConfig{});
    const std::string jsonl = timeline_to_jsonl(timeline);
    CHECK(jsonl.find("{\"kind\":\"key_press\",\"target\":\"E\",\"motor_start_ms\":903.33,"
                     "\"motion_start_ms\":922.50,\"motion_end_ms\":1000.00}") !=
          std::string::npos);
    // one record per line, every line is an object
    std::size_t lines = 0;
    for (char c : jsonl)
        if (c == '\n') ++lines;
    std::size_t braces = 0;
    for (std::size_t pos = jsonl.find("{\"kind\""); pos != std::string::npos;
         pos = jsonl.find("{\"kind\"", pos + 1))
        ++braces;
    CHECK(lines == braces);
}
