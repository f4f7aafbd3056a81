#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flutesim/fingering.hpp"
#include "flutesim/score.hpp"
#include "flutesim/synth.hpp"

namespace flutesim {

struct F0Frame {
    double time_ms = 0.0; // frame center
    bool voiced = false;
    double f0_hz = 0.0;   // > 0 when voiced
};

struct F0Track {
    std::vector<F0Frame> frames;
    double frame_ms = 40.0;
    double hop_ms = 10.0;
};

struct AnalysisConfig {
    double frame_ms = 40.0;
    double hop_ms = 10.0;
    double fmin_hz = 200.0;
    double fmax_hz = 2500.0;
    double tolerance_cents = 50.0;
    double trim_ms = 100.0;
    double search_cents = 15.0;
    std::size_t fft_size = 1u << 15;
    double spectrogram_window_ms = 12.0;
    double spectrogram_hop_ms = 3.0;
    double a4_hz = 440.0;
    double silence_rms = 1e-4;
    double voicing_threshold = 0.5;
    double breath_gap_ms = 150.0;
    double onset_window_ms = 100.0;
};

struct PitchVerdict {
    int note_index = 0;
    int midi_note = 0;
    double target_hz = 0.0;
    double median_f0_hz = 0.0;      // 0 when no voiced frames
    double deviation_cents = 0.0;   // meaningless when empty_note
    bool pass = false;              // |deviation| <= tolerance and not empty
    bool empty_note = false;        // no voiced frames inside the note
    bool unintended_pitch = false;
    bool unstable_onset = false;
    bool breath = false;
};

struct HarmonicReport {
    int note_index = 0;
    double f0_hz = 0.0;
    double spl2_db = 0.0;
    double spl3_db = 0.0;

    double delta_spl_db() const { return spl2_db - spl3_db; }
};

struct Spectrogram {
    std::vector<double> times_ms;            // column centers
    std::vector<double> freqs_hz;            // bin centers, one-sided
    std::vector<std::vector<double>> magnitude_db; // [time][freq], dB re max
    double window_ms = 12.0;
    double reference_magnitude = 1.0;        // linear magnitude mapped to 0 dB
};

struct DeltaSplComparison {
    std::vector<double> difference_db;       // delta_on - delta_off per note
    bool all_low_increased = false;
    bool middle_unchanged = false;           // |difference| < middle_tol on all middle notes
    double middle_tolerance_db = 0.5;
};

/// Frame-based fundamental frequency estimation by normalized
/// autocorrelation with parabolic lag refinement. Frames with peak
/// correlation below the voicing threshold, or RMS below the silence floor,
/// are unvoiced. Accuracy contract: within +/-5 cents on clean harmonic
/// tones across the instrument range (see the test suite's sweep).
F0Track estimate_f0(const AudioBuffer& audio, const AnalysisConfig& cfg = {});

/// 1200 * log2(f / f_target). Throws DomainError on non-positive input.
double cents(double f_hz, double f_target_hz);

/// Per-note pitch verdicts against the score at tolerance_cents. The track
/// and score must be in the same time base; offset_ms shifts score onsets
/// into track time (use the timeline lead-in).
std::vector<PitchVerdict> verify_pitch(const F0Track& track, const Score& score,
                                       const AnalysisConfig& cfg = {},
                                       double offset_ms = 0.0);

/// Hann-windowed short-time Fourier magnitude in dB re max, FFT size the
/// next power of two >= the window length.
Spectrogram spectrogram(const AudioBuffer& audio, double window_ms = 12.0,
                        double hop_ms = 3.0);

/// The note's sounding interval with trim_ms removed at each end.
/// Throws NoteTooShort when duration <= 2 * trim_ms.
AudioBuffer stable_segment(const AudioBuffer& audio, const NoteEvent& note,
                           double trim_ms = 100.0, double offset_ms = 0.0);

/// Peak level (dB re full-scale amplitude) within +/-search_cents of
/// h * f0. The segment is Hann-windowed and zero-padded or truncated to
/// fft_size. Throws DomainError when the search band reaches Nyquist.
double harmonic_spl(const AudioBuffer& segment, double f0_hz, int harmonic,
                    double search_cents = 15.0, std::size_t fft_size = 1u << 15);

/// Per-note 2nd/3rd harmonic reports over the stable segments of a score.
/// Notes too short to trim (duration <= 2 * trim_ms) are omitted; the
/// surviving reports keep their original note_index.
std::vector<HarmonicReport> harmonic_reports(const AudioBuffer& audio,
                                             const Score& score,
                                             const AnalysisConfig& cfg = {},
                                             double offset_ms = 0.0);

/// Per-note (delta_on - delta_off) with the two summary findings: an
/// increase on every low-register note and no consistent change on middle
/// notes. Throws LengthMismatch on differently sized inputs.
DeltaSplComparison compare_delta_spl(const std::vector<HarmonicReport>& on,
                                     const std::vector<HarmonicReport>& off,
                                     const std::vector<Register>& registers,
                                     double middle_tolerance_db = 0.5);

} // namespace flutesim
