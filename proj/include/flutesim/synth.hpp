#pragma once

#include <cstdint>
#include <vector>

#include "flutesim/fingering.hpp"
#include "flutesim/scheduler.hpp"

namespace flutesim {

struct SynthConfig {
    int sample_rate_hz = 44100;
    double a4_hz = 440.0;
    int n_harmonics = 8;        // >= 3 so the 2nd/3rd harmonic balance exists
    double jet_gain_db = 3.0;   // per-harmonic shift at full jet activation
    bool key_click_enabled = true;
    double key_click_db = -20.0; // click level relative to the tone fundamental
    double onset_ramp_ms = 20.0;
    std::uint64_t noise_seed = 1;
};

struct AudioBuffer {
    int sample_rate_hz = 44100;
    std::vector<double> samples; // mono, in [-1, 1] after normalization

    double duration_ms() const {
        return 1000.0 * static_cast<double>(samples.size()) / sample_rate_hz;
    }
};

/// Jet-offset state: 0 = middle-register head position, 1 = head rotated to
/// the low-register angle. Intermediate values occur only while the joint
/// is in motion.
struct JetState {
    double activation = 0.0;
};

/// Equal temperament: f = a4 * 2^((n - 69) / 12). Throws RangeError
/// outside MIDI 0..127.
double note_to_freq(int midi_note, double a4_hz = 440.0);

/// Additive model amplitude for harmonic h (1-based): base 1/h, with the
/// 2nd harmonic boosted and the 3rd cut by jet_gain_db * activation, so the
/// model's SPL2 - SPL3 rises by exactly 2 * jet_gain_db at full activation.
double harmonic_amplitude(int h_index, const JetState& jet, const SynthConfig& cfg);

/// Renders a timeline to audio. At every instant the sounding pitch is the
/// table note matching the instantaneous key mask (so transient masks during
/// transitions audibly sound); unmatched masks render as silence. The jet
/// state follows head-joint events linearly across the rotation. Key clicks,
/// when enabled, are seeded white-noise bursts spanning each key's travel
/// window. The final buffer is peak-normalized to 0.9.
AudioBuffer render(const ActuationTimeline& timeline, const FingeringTable& table,
                   const SynthConfig& cfg);

} // namespace flutesim
