#include "flutesim/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flutesim/error.hpp"

namespace flutesim {

double note_to_freq(int midi_note, double a4_hz) {
    if (midi_note < 0 || midi_note > 127)
        throw Error(ErrorCode::RangeError,
                    "MIDI note " + std::to_string(midi_note) + " outside 0..127");
    if (!(a4_hz > 0.0))
        throw Error(ErrorCode::DomainError, "reference tuning must be positive");
    return a4_hz * std::pow(2.0, (midi_note - 69) / 12.0);
}

double harmonic_amplitude(int h_index, const JetState& jet, const SynthConfig& cfg) {
    if (h_index < 1)
        throw Error(ErrorCode::DomainError, "harmonic index must be >= 1");
    const double base = 1.0 / h_index;
    if (h_index == 2)
        return base * std::pow(10.0, cfg.jet_gain_db * jet.activation / 20.0);
    if (h_index == 3)
        return base * std::pow(10.0, -cfg.jet_gain_db * jet.activation / 20.0);
    return base;
}

namespace {

// Deterministic across platforms, unlike <random> distributions.
struct SplitMix64 {
    std::uint64_t state;
    double next_unit() { // uniform in [-1, 1)
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * (2.0 / 9007199254740992.0) - 1.0;
    }
};

// Piecewise-linear jet activation assembled from head-joint events.
class JetTrack {
public:
    JetTrack(const ActuationTimeline& timeline) {
        for (const ActuationEvent& ev : timeline.events) {
            if (!ev.is_head_event()) continue;
            const double target = ev.kind == ActuationKind::HeadRotateTo ? 1.0 : 0.0;
            ramps_.push_back({ev.motion_start_ms, ev.motion_end_ms, target});
        }
    }

    double activation_at(double t_ms) const {
        double level = 0.0;
        for (const Ramp& r : ramps_) {
            if (t_ms >= r.end) {
                level = r.target;
            } else if (t_ms > r.start) {
                const double frac = (t_ms - r.start) / (r.end - r.start);
                return level + (r.target - level) * frac;
            } else {
                break;
            }
        }
        return level;
    }

private:
    struct Ramp {
        double start, end, target;
    };
    std::vector<Ramp> ramps_;
};

// Key-state step function under completion semantics: a press takes effect
// when its travel ends, a release likewise.
struct MaskChange {
    double time_ms;
    KeyId key;
    bool press;
};

std::vector<MaskChange> mask_changes(const ActuationTimeline& timeline) {
    std::vector<MaskChange> changes;
    for (const ActuationEvent& ev : timeline.events) {
        if (!ev.is_key_event()) continue;
        changes.push_back({ev.motion_end_ms, *ev.key, ev.kind == ActuationKind::KeyPress});
    }
    std::sort(changes.begin(), changes.end(),
              [](const MaskChange& a, const MaskChange& b) { return a.time_ms < b.time_ms; });
    return changes;
}

} // namespace

AudioBuffer render(const ActuationTimeline& timeline, const FingeringTable& table,
                   const SynthConfig& cfg) {
    if (cfg.sample_rate_hz <= 0)
        throw Error(ErrorCode::DomainError, "sample rate must be positive");
    if (cfg.n_harmonics < 3)
        throw Error(ErrorCode::DomainError, "need at least 3 harmonics");
    if (cfg.jet_gain_db < 0.0)
        throw Error(ErrorCode::DomainError, "jet gain must be non-negative");

    const double sr = cfg.sample_rate_hz;
    double end_ms = timeline.lead_in_ms;
    for (const NoteEvent& n : timeline.notes.events)
        end_ms = std::max(end_ms, n.off_ms() + timeline.lead_in_ms);
    for (const ActuationEvent& ev : timeline.events)
        end_ms = std::max(end_ms, ev.motion_end_ms);
    end_ms += 50.0; // decay/click tail

    AudioBuffer buffer;
    buffer.sample_rate_hz = cfg.sample_rate_hz;
    buffer.samples.assign(static_cast<std::size_t>(std::ceil(end_ms * sr / 1000.0)), 0.0);

    const JetTrack jet(timeline);
    const std::vector<MaskChange> changes = mask_changes(timeline);

    // Tone: one fundamental phase accumulator keeps all harmonics continuous
    // across fingering changes.
    double phase = 0.0;
    std::size_t change_idx = 0;
    KeyMask mask;
    for (const NoteEvent& note : timeline.notes.events) {
        const double onset = note.onset_ms + timeline.lead_in_ms;
        const double off = note.off_ms() + timeline.lead_in_ms;

        // Advance the key state to the note onset.
        while (change_idx < changes.size() && changes[change_idx].time_ms <= onset) {
            if (changes[change_idx].press)
                mask.set(changes[change_idx].key);
            else
                mask.clear(changes[change_idx].key);
            ++change_idx;
        }

        std::size_t local_idx = change_idx;
        KeyMask local_mask = mask;
        double seg_start = onset;
        while (seg_start < off) {
            double seg_end = off;
            if (local_idx < changes.size() && changes[local_idx].time_ms < off)
                seg_end = changes[local_idx].time_ms;

            // The sounding pitch for this stable key state. Registers share
            // fingerings, so resolution prefers the note nearest the scored
            // one; unmatched transient masks sound as nothing.
            double freq = 0.0;
            if (local_mask == table.lookup(note.midi_note)) {
                freq = note_to_freq(note.midi_note, cfg.a4_hz);
            } else if (const auto found = table.find_note(local_mask, note.midi_note)) {
                freq = note_to_freq(*found, cfg.a4_hz);
            }

            const auto first_sample = static_cast<std::size_t>(std::ceil(seg_start * sr / 1000.0));
            const auto end_sample = static_cast<std::size_t>(std::ceil(seg_end * sr / 1000.0));
            for (std::size_t s = first_sample; s < end_sample && s < buffer.samples.size(); ++s) {
                const double t_ms = 1000.0 * static_cast<double>(s) / sr;
                if (freq > 0.0) {
                    double envelope = 1.0;
                    if (cfg.onset_ramp_ms > 0.0) {
                        envelope = std::min(envelope, (t_ms - onset) / cfg.onset_ramp_ms);
                        envelope = std::min(envelope, (off - t_ms) / cfg.onset_ramp_ms);
                        envelope = std::clamp(envelope, 0.0, 1.0);
                    }
                    const JetState state{jet.activation_at(t_ms)};
                    double value = 0.0;
                    for (int h = 1; h <= cfg.n_harmonics; ++h)
                        value += harmonic_amplitude(h, state, cfg) * std::sin(h * phase);
                    buffer.samples[s] += envelope * value;
                }
                phase += 2.0 * std::numbers::pi * freq / sr;
                if (phase > 2.0 * std::numbers::pi * 1024.0)
                    phase = std::fmod(phase, 2.0 * std::numbers::pi);
            }

            while (local_idx < changes.size() && changes[local_idx].time_ms <= seg_end) {
                if (changes[local_idx].press)
                    local_mask.set(changes[local_idx].key);
                else
                    local_mask.clear(changes[local_idx].key);
                ++local_idx;
            }
            seg_start = seg_end;
        }
    }

    // Mechanical key clicks: broadband bursts spanning each key's travel
    // window, audible regardless of breath.
    if (cfg.key_click_enabled) {
        const double click_amp = std::pow(10.0, cfg.key_click_db / 20.0);
        std::uint64_t event_counter = 0;
        for (const ActuationEvent& ev : timeline.events) {
            ++event_counter;
            if (!ev.is_key_event()) continue;
            SplitMix64 rng{cfg.noise_seed ^ (event_counter * 0x9E3779B97F4A7C15ull)};
            const auto first = static_cast<std::size_t>(
                std::max(0.0, std::ceil(ev.motion_start_ms * sr / 1000.0)));
            const auto last = static_cast<std::size_t>(
                std::max(0.0, std::ceil(ev.motion_end_ms * sr / 1000.0)));
            for (std::size_t s = first; s < last && s < buffer.samples.size(); ++s)
                buffer.samples[s] += click_amp * rng.next_unit();
        }
    }

    double peak = 0.0;
    for (double v : buffer.samples) peak = std::max(peak, std::abs(v));
    if (peak > 0.0) {
        const double gain = 0.9 / peak;
        for (double& v : buffer.samples) v *= gain;
    }
    return buffer;
}

} // namespace flutesim
