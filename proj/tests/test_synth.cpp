#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>

#include "flutesim/analysis.hpp"
#include "flutesim/error.hpp"
#include "flutesim/scheduler.hpp"
#include "flutesim/synth.hpp"
#include "flutesim/wav.hpp"

using namespace flutesim;

namespace {

bool throws_code(ErrorCode code, const std::function<void()>& body) {
    try {
        body();
    } catch (const Error& e) {
        return e.code() == code;
    }
    return false;
}

ActuationTimeline make_timeline(const std::vector<int>& notes, double spacing_ms,
                                double duration_ms, bool assist = true) {
    Score score;
    for (std::size_t i = 0; i < notes.size(); ++i)
        score.events.push_back({notes[i], spacing_ms * double(i), duration_ms, 96});
    SchedulerConfig cfg;
    cfg.include_head_joint = assist;
    return build_timeline(score, FingeringTable{},
                          ActuationProfile::load("profiles/paper_table1.profile"), cfg);
}

double rms(const std::vector<double>& samples, std::size_t begin, std::size_t end) {
    double sum = 0.0;
    for (std::size_t i = begin; i < end && i < samples.size(); ++i)
        sum += samples[i] * samples[i];
    return std::sqrt(sum / double(end - begin));
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("equal temperament conversion") {
    CHECK(note_to_freq(69, 440.0) == doctest::Approx(440.0));
    CHECK(note_to_freq(60, 440.0) == doctest::Approx(261.6256).epsilon(1e-6));
    CHECK(note_to_freq(96, 440.0) == doctest::Approx(2093.005).epsilon(1e-6));
    CHECK(throws_code(ErrorCode::RangeError, [] { note_to_freq(-1, 440.0); }));
    CHECK(throws_code(ErrorCode::RangeError, [] { note_to_freq(128, 440.0); }));
}

TEST_CASE("harmonic amplitudes implement the jet-offset model") {
    SynthConfig cfg;
    cfg.jet_gain_db = 3.0;

    const JetState middle{0.0};
    for (int h = 1; h <= 8; ++h)
        CHECK(harmonic_amplitude(h, middle, cfg) == doctest::Approx(1.0 / h));

    const JetState low{1.0};
    CHECK(harmonic_amplitude(2, low, cfg) ==
          doctest::Approx(0.5 * std::pow(10.0, 3.0 / 20.0)));
    CHECK(harmonic_amplitude(3, low, cfg) ==
          doctest::Approx((1.0 / 3.0) * std::pow(10.0, -3.0 / 20.0)));
    CHECK(harmonic_amplitude(4, low, cfg) == doctest::Approx(0.25));

    // The model's definition: full activation moves SPL2 - SPL3 by 2g.
    const double delta_low = 20.0 * std::log10(harmonic_amplitude(2, low, cfg) /
                                               harmonic_amplitude(3, low, cfg));
    const double delta_mid = 20.0 * std::log10(harmonic_amplitude(2, middle, cfg) /
                                               harmonic_amplitude(3, middle, cfg));
    CHECK(delta_low - delta_mid == doctest::Approx(6.0));
}

TEST_CASE("a rendered A4 measures back at 440 Hz") {
    SynthConfig cfg;
    cfg.key_click_enabled = false;
    const AudioBuffer audio = render(make_timeline({69}, 1000.0, 1000.0), FingeringTable{}, cfg);

    const F0Track track = estimate_f0(audio);
    std::vector<double> voiced;
    for (const F0Frame& f : track.frames)
        if (f.voiced && f.time_ms > 600.0 && f.time_ms < 1400.0) voiced.push_back(f.f0_hz);
    REQUIRE(!voiced.empty());
    for (double f : voiced) CHECK(std::abs(cents(f, 440.0)) < 5.0);
}

TEST_CASE("inter-note gaps are digital silence when clicks are off") {
    SynthConfig cfg;
    cfg.key_click_enabled = false;
    const AudioBuffer audio =
        render(make_timeline({69, 71}, 500.0, 400.0), FingeringTable{}, cfg);
    const double sr = audio.sample_rate_hz;
    // gap between note 0 (ends at 900 ms audio time) and note 1 (starts 1000 ms)
    const auto begin = std::size_t(0.910 * sr);
    const auto end = std::size_t(0.990 * sr);
    CHECK(rms(audio.samples, begin, end) == 0.0);
}

TEST_CASE("key clicks fill actuation windows with broadband noise") {
    SynthConfig cfg;
    cfg.key_click_enabled = true;
    const AudioBuffer audio =
        render(make_timeline({69, 71}, 500.0, 400.0), FingeringTable{}, cfg);
    const double sr = audio.sample_rate_hz;
    // The A4->B4 transition travels inside the gap, ending at onset 1000 ms.
    const auto begin = std::size_t(0.930 * sr);
    const auto end = std::size_t(0.995 * sr);
    CHECK(rms(audio.samples, begin, end) > 0.0);
}

TEST_CASE("clicks paint broadband streaks at transition times") {
    // Spectrogram columns at the transition carry band energy far above the
    // tone's harmonics when clicks are on, and none when off.
    const auto timeline = make_timeline({69, 71}, 500.0, 450.0);
    SynthConfig cfg;

    const auto band_energy_at = [&](const AudioBuffer& audio, double t_ms) {
        const Spectrogram spec = spectrogram(audio);
        double energy = 0.0;
        for (std::size_t t = 0; t < spec.times_ms.size(); ++t) {
            if (std::abs(spec.times_ms[t] - t_ms) > 6.0) continue;
            for (std::size_t k = 0; k < spec.freqs_hz.size(); ++k)
                if (spec.freqs_hz[k] > 8000.0) // well above the 8 harmonics of B4
                    energy += std::pow(10.0, spec.magnitude_db[t][k] / 10.0);
        }
        return energy;
    };

    cfg.key_click_enabled = true;
    const double with_clicks = band_energy_at(render(timeline, FingeringTable{}, cfg), 980.0);
    cfg.key_click_enabled = false;
    const double without = band_energy_at(render(timeline, FingeringTable{}, cfg), 980.0);
    CHECK(with_clicks > 1000.0 * (without + 1e-30));
}

TEST_CASE("a slow transition sounds its transient fingering") {
    // Scheduler hazard -> synth -> analysis closed loop: a release that
    // finishes 100 ms before the press leaves an intermediate state that
    // matches another table entry, which must sound and be flagged.
    FingeringTable table;
    table.set(60, KeyMask{KeyId::C});
    table.set(61, KeyMask{KeyId::E});
    table.set(62, KeyMask{});

    ActuationProfile profile = ActuationProfile::uniform(200.0, 150.0);
    profile.keys[std::size_t(KeyId::C)] = {100.0, 0.0, 50.0, 0.0};

    Score score;
    score.events = {{60, 0.0, 500.0, 96}, {61, 500.0, 500.0, 96}};
    SchedulerConfig scfg;
    scfg.include_head_joint = false;
    const ActuationTimeline timeline = build_timeline(score, table, profile, scfg);

    // The C release ends at 900 ms audio time, the E press at 1000 ms; the
    // all-open mask in between is note 62's fingering.
    const auto hazards = detect_transient_hazards(timeline, table, 50.0);
    REQUIRE(hazards.size() == 1);
    CHECK(hazards[0].window_ms == doctest::Approx(100.0));
    REQUIRE(hazards[0].sounding_as.has_value());
    CHECK(*hazards[0].sounding_as == 62);

    SynthConfig cfg;
    cfg.key_click_enabled = false;
    const AudioBuffer audio = render(timeline, table, cfg);
    const auto verdicts = verify_pitch(estimate_f0(audio), score, AnalysisConfig{}, 500.0);
    REQUIRE(verdicts.size() == 2);
    CHECK(verdicts[0].pass);             // the median still sits on C4
    CHECK(verdicts[0].unintended_pitch); // but the D4 blip is flagged
    CHECK(verdicts[1].pass);
}

TEST_CASE("rendering is deterministic for a fixed seed") {
    SynthConfig cfg;
    cfg.noise_seed = 99;
    const auto timeline = make_timeline({69, 71, 74}, 400.0, 350.0);
    const AudioBuffer a = render(timeline, FingeringTable{}, cfg);
    const AudioBuffer b = render(timeline, FingeringTable{}, cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    CHECK(a.samples == b.samples);

    cfg.noise_seed = 100;
    const AudioBuffer c = render(timeline, FingeringTable{}, cfg);
    CHECK(a.samples != c.samples);
}

TEST_CASE("delta SPL rises monotonically with jet activation") {
    // Render the same sustained low note at activation 0, 0.5 and 1 by
    // faking the head state with custom rotation events.
    SynthConfig cfg;
    cfg.key_click_enabled = false;
    const FingeringTable table;

    // The measurement window is [600, 1400] ms of audio time. A rotation
    // finished before the note holds activation 1; one still in flight and
    // centered on the window averages 0.5; no rotation leaves 0.
    const auto measure = [&](double motion_start, double motion_end) {
        ActuationTimeline timeline = make_timeline({67}, 1000.0, 1000.0, false);
        if (motion_end > motion_start) {
            ActuationEvent ev;
            ev.kind = ActuationKind::HeadRotateTo;
            ev.angle_deg = 22.0;
            ev.motor_start_ms = std::max(0.0, motion_start - 33.33);
            ev.motion_start_ms = motion_start;
            ev.motion_end_ms = motion_end;
            ev.note_index = 0;
            timeline.events.insert(timeline.events.begin(), ev);
        }
        const AudioBuffer audio = render(timeline, table, cfg);
        NoteEvent note{67, 0.0, 1000.0, 96};
        const AudioBuffer segment = stable_segment(audio, note, 100.0, 500.0);
        const double f0 = note_to_freq(67);
        return harmonic_spl(segment, f0, 2) - harmonic_spl(segment, f0, 3);
    };

    const double d0 = measure(0.0, 0.0);        // never rotated
    const double d05 = measure(0.0, 2000.0);    // mid-rotation over the window
    const double d1 = measure(100.0, 140.0);    // rotation done before the note
    CHECK(d05 > d0 + 1.0);
    CHECK(d1 > d05 + 1.0);
}

TEST_CASE("WAV files carry 16-bit mono PCM") {
    AudioBuffer buffer;
    buffer.sample_rate_hz = 44100;
    buffer.samples.assign(44100, 0.0);
    for (std::size_t i = 0; i < buffer.samples.size(); ++i)
        buffer.samples[i] = 0.5 * std::sin(2.0 * 3.14159265358979 * 440.0 * i / 44100.0);

    const std::string path = temp_path("flutesim_wav_test.wav");
    write_wav(buffer, path);
    CHECK(std::filesystem::file_size(path) == 44u + 88200u);

    const AudioBuffer round = read_wav(path);
    CHECK(round.sample_rate_hz == 44100);
    REQUIRE(round.samples.size() == buffer.samples.size());
    double max_err = 0.0;
    for (std::size_t i = 0; i < round.samples.size(); ++i)
        max_err = std::max(max_err, std::abs(round.samples[i] - buffer.samples[i]));
    CHECK(max_err <= std::pow(2.0, -15.0));
    std::filesystem::remove(path);
}

TEST_CASE("empty WAV files are valid") {
    AudioBuffer empty;
    const std::string path = temp_path("flutesim_wav_empty.wav");
    write_wav(empty, path);
    CHECK(std::filesystem::file_size(path) == 44u);
    const AudioBuffer round = read_wav(path);
    CHECK(round.samples.empty());
    std::filesystem::remove(path);
}
