#include "flutesim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flutesim/error.hpp"
#include "flutesim/fft.hpp"

namespace flutesim {

namespace {

std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(n));
    return w;
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

int nearest_chromatic(double f_hz, double a4_hz) {
    return static_cast<int>(std::lround(69.0 + 12.0 * std::log2(f_hz / a4_hz)));
}

} // namespace

double cents(double f_hz, double f_target_hz) {
    if (!(f_hz > 0.0) || !(f_target_hz > 0.0))
        throw Error(ErrorCode::DomainError, "cents() requires positive frequencies");
    return 1200.0 * std::log2(f_hz / f_target_hz);
}

F0Track estimate_f0(const AudioBuffer& audio, const AnalysisConfig& cfg) {
    const double sr = audio.sample_rate_hz;
    if (!(cfg.fmin_hz > 0.0) || cfg.fmin_hz >= cfg.fmax_hz)
        throw Error(ErrorCode::DomainError, "need 0 < fmin < fmax");
    if (sr < 4.0 * cfg.fmax_hz)
        throw Error(ErrorCode::DomainError, "sample rate below 4 * fmax");

    const auto frame_len = static_cast<std::size_t>(std::lround(cfg.frame_ms * sr / 1000.0));
    const auto hop = static_cast<std::size_t>(std::lround(cfg.hop_ms * sr / 1000.0));
    const auto lag_min = static_cast<std::size_t>(std::floor(sr / cfg.fmax_hz));
    const auto lag_max = static_cast<std::size_t>(std::ceil(sr / cfg.fmin_hz));
    if (hop == 0)
        throw Error(ErrorCode::DomainError, "hop too small");
    if (frame_len < 2 * lag_max)
        throw Error(ErrorCode::DomainError, "frame too short for fmin");

    F0Track track;
    track.frame_ms = cfg.frame_ms;
    track.hop_ms = cfg.hop_ms;

    std::vector<double> corr(lag_max + 2, 0.0);
    std::vector<double> energy_prefix(frame_len + 1, 0.0);
    for (std::size_t start = 0; start + frame_len <= audio.samples.size(); start += hop) {
        const double* x = audio.samples.data() + start;
        F0Frame frame;
        frame.time_ms = 1000.0 * (static_cast<double>(start) + frame_len / 2.0) / sr;

        double energy = 0.0;
        for (std::size_t i = 0; i < frame_len; ++i) {
            energy += x[i] * x[i];
            energy_prefix[i + 1] = energy;
        }
        const double rms = std::sqrt(energy / static_cast<double>(frame_len));
        if (rms < cfg.silence_rms) {
            track.frames.push_back(frame);
            continue;
        }

        // Normalized autocorrelation over the overlapping region.
        double best_r = 0.0;
        for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
            const std::size_t overlap = frame_len - lag;
            double num = 0.0;
            for (std::size_t i = 0; i < overlap; ++i) num += x[i] * x[i + lag];
            const double e1 = energy_prefix[overlap];
            const double e2 = energy_prefix[frame_len] - energy_prefix[lag];
            const double denom = std::sqrt(e1 * e2);
            corr[lag] = denom > 0.0 ? num / denom : 0.0;
            best_r = std::max(best_r, corr[lag]);
        }
        if (best_r < cfg.voicing_threshold) {
            track.frames.push_back(frame);
            continue;
        }

        // A periodic signal peaks at every multiple of its period, so take
        // the shortest lag whose peak is nearly as tall as the best. The
        // margin absorbs integer-lag sampling of a peak that falls between
        // bins (worst just under 0.94 of a peak that lands on one); spurious
        // inter-harmonic maxima stay below ~0.7.
        std::size_t pick = 0;
        for (std::size_t lag = lag_min; lag <= lag_max && pick == 0; ++lag) {
            const bool local_max = (lag == lag_min || corr[lag] >= corr[lag - 1]) &&
                                   (lag == lag_max || corr[lag] >= corr[lag + 1]);
            if (local_max && corr[lag] >= 0.90 * best_r) pick = lag;
        }
        if (pick == 0) {
            track.frames.push_back(frame);
            continue;
        }

        double refined = static_cast<double>(pick);
        if (pick > lag_min && pick < lag_max) {
            const double a = corr[pick - 1], b = corr[pick], c = corr[pick + 1];
            const double denom = a - 2.0 * b + c;
            if (std::abs(denom) > 1e-12) {
                const double delta = 0.5 * (a - c) / denom;
                if (std::abs(delta) <= 1.0) refined += delta;
            }
        }

        frame.voiced = true;
        frame.f0_hz = sr / refined;
        track.frames.push_back(frame);
    }
    return track;
}

std::vector<PitchVerdict> verify_pitch(const F0Track& track, const Score& score,
                                       const AnalysisConfig& cfg, double offset_ms) {
    std::vector<PitchVerdict> verdicts;
    verdicts.reserve(score.events.size());

    for (std::size_t i = 0; i < score.events.size(); ++i) {
        const NoteEvent& note = score.events[i];
        const double start = note.onset_ms + offset_ms;
        const double end = note.off_ms() + offset_ms;

        PitchVerdict v;
        v.note_index = static_cast<int>(i);
        v.midi_note = note.midi_note;
        v.target_hz = note_to_freq(note.midi_note, cfg.a4_hz);

        std::vector<const F0Frame*> frames;
        for (const F0Frame& f : track.frames)
            if (f.time_ms >= start && f.time_ms < end) frames.push_back(&f);

        std::vector<double> voiced;
        for (const F0Frame* f : frames)
            if (f->voiced) voiced.push_back(f->f0_hz);

        if (voiced.empty()) {
            v.empty_note = true;
            v.pass = false;
            verdicts.push_back(v);
            continue;
        }

        v.median_f0_hz = median(voiced);
        v.deviation_cents = cents(v.median_f0_hz, v.target_hz);
        v.pass = std::abs(v.deviation_cents) <= cfg.tolerance_cents;

        // Unintended pitch: three or more consecutive voiced frames that sit
        // on a different chromatic pitch.
        int run = 0;
        for (const F0Frame* f : frames) {
            bool qualifies = false;
            if (f->voiced && std::abs(cents(f->f0_hz, v.target_hz)) > cfg.tolerance_cents) {
                const int other = nearest_chromatic(f->f0_hz, cfg.a4_hz);
                if (other != note.midi_note && other >= 0 && other <= 127 &&
                    std::abs(cents(f->f0_hz, note_to_freq(other, cfg.a4_hz))) <=
                        cfg.tolerance_cents)
                    qualifies = true;
            }
            run = qualifies ? run + 1 : 0;
            if (run >= 3) {
                v.unintended_pitch = true;
                break;
            }
        }

        // Unstable onset: trouble in the first 100 ms while the rest is fine.
        bool onset_bad = false;
        std::vector<double> remainder;
        for (const F0Frame* f : frames) {
            if (f->time_ms < start + cfg.onset_window_ms) {
                if (!f->voiced || std::abs(cents(f->f0_hz, v.target_hz)) > cfg.tolerance_cents)
                    onset_bad = true;
            } else if (f->voiced) {
                remainder.push_back(f->f0_hz);
            }
        }
        if (onset_bad && !remainder.empty() &&
            std::abs(cents(median(remainder), v.target_hz)) <= cfg.tolerance_cents)
            v.unstable_onset = true;

        // Breath: a long fully-unvoiced gap right before this note.
        if (i > 0) {
            const double gap_start = score.events[i - 1].off_ms() + offset_ms;
            if (start - gap_start >= cfg.breath_gap_ms) {
                bool all_unvoiced = true;
                bool any = false;
                for (const F0Frame& f : track.frames) {
                    if (f.time_ms < gap_start || f.time_ms >= start) continue;
                    any = true;
                    if (f.voiced) all_unvoiced = false;
                }
                v.breath = any && all_unvoiced;
            }
        }

        verdicts.push_back(v);
    }
    return verdicts;
}

Spectrogram spectrogram(const AudioBuffer& audio, double window_ms, double hop_ms) {
    const double sr = audio.sample_rate_hz;
    const auto window_len = static_cast<std::size_t>(std::lround(window_ms * sr / 1000.0));
    const auto hop = static_cast<std::size_t>(std::lround(hop_ms * sr / 1000.0));
    if (window_len < 32)
        throw Error(ErrorCode::DomainError, "spectrogram window below 32 samples");
    if (hop == 0)
        throw Error(ErrorCode::DomainError, "spectrogram hop too small");

    const std::size_t fft_size = next_power_of_two(window_len);
    const std::vector<double> window = hann_window(window_len);

    Spectrogram spec;
    spec.window_ms = window_ms;
    for (std::size_t k = 0; k <= fft_size / 2; ++k)
        spec.freqs_hz.push_back(static_cast<double>(k) * sr / static_cast<double>(fft_size));

    std::vector<double> frame(window_len);
    double max_mag = 0.0;
    std::vector<std::vector<double>> magnitudes;
    for (std::size_t start = 0; start + window_len <= audio.samples.size(); start += hop) {
        for (std::size_t i = 0; i < window_len; ++i)
            frame[i] = window[i] * audio.samples[start + i];
        const auto bins = fft_real(frame, fft_size);
        std::vector<double> mag(fft_size / 2 + 1);
        for (std::size_t k = 0; k <= fft_size / 2; ++k) {
            mag[k] = std::abs(bins[k]);
            max_mag = std::max(max_mag, mag[k]);
        }
        magnitudes.push_back(std::move(mag));
        spec.times_ms.push_back(1000.0 * (static_cast<double>(start) + window_len / 2.0) / sr);
    }

    spec.reference_magnitude = max_mag > 0.0 ? max_mag : 1.0;
    const double floor_mag = spec.reference_magnitude * 1e-8; // -160 dB floor
    for (auto& mag : magnitudes) {
        std::vector<double> row(mag.size());
        for (std::size_t k = 0; k < mag.size(); ++k)
            row[k] = 20.0 * std::log10(std::max(mag[k], floor_mag) / spec.reference_magnitude);
        spec.magnitude_db.push_back(std::move(row));
    }
    return spec;
}

AudioBuffer stable_segment(const AudioBuffer& audio, const NoteEvent& note,
                           double trim_ms, double offset_ms) {
    if (note.duration_ms <= 2.0 * trim_ms)
        throw Error(ErrorCode::NoteTooShort,
                    "note of " + std::to_string(note.duration_ms) +
                        " ms cannot be trimmed by 2 x " + std::to_string(trim_ms) + " ms");
    const double sr = audio.sample_rate_hz;
    const double start_ms = note.onset_ms + trim_ms + offset_ms;
    const double end_ms = note.off_ms() - trim_ms + offset_ms;
    const auto start = static_cast<std::size_t>(
        std::clamp(std::lround(start_ms * sr / 1000.0), 0L,
                   static_cast<long>(audio.samples.size())));
    const auto end = static_cast<std::size_t>(
        std::clamp(std::lround(end_ms * sr / 1000.0), static_cast<long>(start),
                   static_cast<long>(audio.samples.size())));

    AudioBuffer segment;
    segment.sample_rate_hz = audio.sample_rate_hz;
    segment.samples.assign(audio.samples.begin() + static_cast<long>(start),
                           audio.samples.begin() + static_cast<long>(end));
    return segment;
}

double harmonic_spl(const AudioBuffer& segment, double f0_hz, int harmonic,
                    double search_cents, std::size_t fft_size) {
    if (segment.samples.empty())
        throw Error(ErrorCode::DomainError, "empty segment");
    if (!(f0_hz > 0.0))
        throw Error(ErrorCode::DomainError, "f0 must be positive");
    if ((fft_size & (fft_size - 1)) != 0 || fft_size == 0)
        throw Error(ErrorCode::DomainError, "FFT size must be a power of two");

    const double sr = segment.sample_rate_hz;
    const double center = harmonic * f0_hz;
    const double lo = center * std::pow(2.0, -search_cents / 1200.0);
    const double hi = center * std::pow(2.0, search_cents / 1200.0);
    if (hi >= sr / 2.0)
        throw Error(ErrorCode::DomainError,
                    "harmonic " + std::to_string(harmonic) + " search band reaches Nyquist");

    const std::size_t n = std::min(segment.samples.size(), fft_size);
    const std::vector<double> window = hann_window(n);
    std::vector<double> frame(n);
    double coherent_gain = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        frame[i] = window[i] * segment.samples[i];
        coherent_gain += window[i];
    }
    const auto bins = fft_real(frame, fft_size);

    double best_amp = -1.0;
    for (std::size_t k = 0; k <= fft_size / 2; ++k) {
        const double freq = static_cast<double>(k) * sr / static_cast<double>(fft_size);
        if (freq < lo || freq > hi) continue;
        best_amp = std::max(best_amp, 2.0 * std::abs(bins[k]) / coherent_gain);
    }
    if (best_amp < 0.0)
        throw Error(ErrorCode::DomainError,
                    "no FFT bin inside the search band around " + std::to_string(center) +
                        " Hz; increase the FFT size");
    return 20.0 * std::log10(std::max(best_amp, 1e-12));
}

std::vector<HarmonicReport> harmonic_reports(const AudioBuffer& audio, const Score& score,
                                             const AnalysisConfig& cfg, double offset_ms) {
    std::vector<HarmonicReport> reports;
    reports.reserve(score.events.size());
    for (std::size_t i = 0; i < score.events.size(); ++i) {
        const NoteEvent& note = score.events[i];
        // Notes shorter than twice the trim have no stable segment; they are
        // left out of the report rather than failing the whole analysis.
        if (note.duration_ms <= 2.0 * cfg.trim_ms) continue;
        const AudioBuffer segment = stable_segment(audio, note, cfg.trim_ms, offset_ms);
        HarmonicReport r;
        r.note_index = static_cast<int>(i);
        r.f0_hz = note_to_freq(note.midi_note, cfg.a4_hz);
        r.spl2_db = harmonic_spl(segment, r.f0_hz, 2, cfg.search_cents, cfg.fft_size);
        r.spl3_db = harmonic_spl(segment, r.f0_hz, 3, cfg.search_cents, cfg.fft_size);
        reports.push_back(r);
    }
    return reports;
}

DeltaSplComparison compare_delta_spl(const std::vector<HarmonicReport>& on,
                                     const std::vector<HarmonicReport>& off,
                                     const std::vector<Register>& registers,
                                     double middle_tolerance_db) {
    if (on.size() != off.size() || on.size() != registers.size())
        throw Error(ErrorCode::LengthMismatch,
                    "comparison inputs must be index-aligned and equally sized");

    DeltaSplComparison cmp;
    cmp.middle_tolerance_db = middle_tolerance_db;
    cmp.all_low_increased = true;
    cmp.middle_unchanged = true;
    for (std::size_t i = 0; i < on.size(); ++i) {
        const double diff = on[i].delta_spl_db() - off[i].delta_spl_db();
        cmp.difference_db.push_back(diff);
        if (registers[i] == Register::Low && diff <= 0.0) cmp.all_low_increased = false;
        if (registers[i] == Register::Middle && std::abs(diff) >= middle_tolerance_db)
            cmp.middle_unchanged = false;
    }
    return cmp;
}

} // namespace flutesim
