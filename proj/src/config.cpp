#include "flutesim/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "flutesim/error.hpp"
#include "text_util.hpp"

namespace flutesim {

namespace {

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "bad numeric value for " + key + ": '" + value + "'");
    }
}

long to_long(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long v = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "bad integer value for " + key + ": '" + value + "'");
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    throw Error(ErrorCode::ConfigError, "bad boolean value for " + key + ": '" + value + "'");
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

} // namespace

Config Config::defaults() { return Config{}; }

void Config::apply(const std::string& key, const std::string& value) {
    if (key == "paths.fingering_table") fingering_table_path = value;
    else if (key == "paths.actuation_profile") actuation_profile_path = value;
    else if (key == "paths.output_dir") output_dir = value;
    else if (key == "scheduler.low_register_max") scheduler.low_register_max = int(to_long(key, value));
    else if (key == "scheduler.high_register_min") scheduler.high_register_min = int(to_long(key, value));
    else if (key == "scheduler.split_factor") scheduler.split_factor = to_double(key, value);
    else if (key == "scheduler.lead_in_ms") scheduler.lead_in_ms = to_double(key, value);
    else if (key == "scheduler.hazard_threshold_ms") scheduler.hazard_threshold_ms = to_double(key, value);
    else if (key == "synth.sample_rate_hz") synth.sample_rate_hz = int(to_long(key, value));
    else if (key == "synth.a4_hz") synth.a4_hz = to_double(key, value);
    else if (key == "synth.n_harmonics") synth.n_harmonics = int(to_long(key, value));
    else if (key == "synth.jet_gain_db") synth.jet_gain_db = to_double(key, value);
    else if (key == "synth.key_click_enabled") synth.key_click_enabled = to_bool(key, value);
    else if (key == "synth.key_click_db") synth.key_click_db = to_double(key, value);
    else if (key == "synth.onset_ramp_ms") synth.onset_ramp_ms = to_double(key, value);
    else if (key == "synth.noise_seed") synth.noise_seed = std::uint64_t(to_long(key, value));
    else if (key == "analysis.tolerance_cents") analysis.tolerance_cents = to_double(key, value);
    else if (key == "analysis.frame_ms") analysis.frame_ms = to_double(key, value);
    else if (key == "analysis.hop_ms") analysis.hop_ms = to_double(key, value);
    else if (key == "analysis.fmin_hz") analysis.fmin_hz = to_double(key, value);
    else if (key == "analysis.fmax_hz") analysis.fmax_hz = to_double(key, value);
    else if (key == "analysis.fft_size") analysis.fft_size = std::size_t(to_long(key, value));
    else if (key == "analysis.trim_ms") analysis.trim_ms = to_double(key, value);
    else if (key == "analysis.search_cents") analysis.search_cents = to_double(key, value);
    else if (key == "analysis.spectrogram_window_ms") analysis.spectrogram_window_ms = to_double(key, value);
    else if (key == "analysis.spectrogram_hop_ms") analysis.spectrogram_hop_ms = to_double(key, value);
    else throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open config '" + path + "'");

    Config cfg = defaults();
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_comment(line);
        const std::string text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::ConfigError,
                        "config line " + std::to_string(line_no) + ": expected key = value");
        cfg.apply(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

void Config::validate() const {
    if (!std::filesystem::exists(fingering_table_path))
        throw Error(ErrorCode::ConfigError,
                    "fingering table '" + fingering_table_path + "' does not exist");
    if (!std::filesystem::exists(actuation_profile_path))
        throw Error(ErrorCode::ConfigError,
                    "actuation profile '" + actuation_profile_path + "' does not exist");
    if (scheduler.low_register_max < kLowestNote || scheduler.low_register_max > kHighestNote)
        throw Error(ErrorCode::ConfigError, "low_register_max outside 60..96");
    if (scheduler.high_register_min <= scheduler.low_register_max)
        throw Error(ErrorCode::ConfigError, "high_register_min must exceed low_register_max");
    if (scheduler.split_factor < 0.0 || scheduler.split_factor > 1.0)
        throw Error(ErrorCode::ConfigError, "split_factor outside [0, 1]");
    if (scheduler.lead_in_ms < 0.0)
        throw Error(ErrorCode::ConfigError, "lead_in_ms must be non-negative");
    if (scheduler.hazard_threshold_ms < 0.0)
        throw Error(ErrorCode::ConfigError, "hazard_threshold_ms must be non-negative");
    if (synth.sample_rate_hz < 8000)
        throw Error(ErrorCode::ConfigError, "sample_rate_hz below 8000");
    if (!(synth.a4_hz > 0.0))
        throw Error(ErrorCode::ConfigError, "a4_hz must be positive");
    if (synth.n_harmonics < 3)
        throw Error(ErrorCode::ConfigError, "n_harmonics must be at least 3");
    if (synth.jet_gain_db < 0.0)
        throw Error(ErrorCode::ConfigError, "jet_gain_db must be non-negative");
    if (!(analysis.tolerance_cents > 0.0))
        throw Error(ErrorCode::ConfigError, "tolerance_cents must be positive");
    if ((analysis.fft_size & (analysis.fft_size - 1)) != 0 || analysis.fft_size < 1024)
        throw Error(ErrorCode::ConfigError, "fft_size must be a power of two >= 1024");

    // The harmonic peak search needs at least one FFT bin inside the
    // narrowest search band, which is +/-search_cents around twice the
    // lowest playable note.
    const double bin_hz = double(synth.sample_rate_hz) / double(analysis.fft_size);
    const double lowest = synth.a4_hz * std::pow(2.0, (kLowestNote - 69) / 12.0);
    const double band_hz = 2.0 * lowest *
                           (std::pow(2.0, analysis.search_cents / 1200.0) -
                            std::pow(2.0, -analysis.search_cents / 1200.0));
    if (bin_hz > band_hz)
        throw Error(ErrorCode::ConfigError,
                    "fft_size too small: FFT bins are wider than the +/-" +
                        std::to_string(analysis.search_cents) + " cent harmonic search band");
}

std::string Config::canonical_text() const {
    std::ostringstream out;
    out << "paths.fingering_table = " << fingering_table_path << "\n"
        << "paths.actuation_profile = " << actuation_profile_path << "\n"
        << "paths.output_dir = " << output_dir << "\n"
        << "scheduler.low_register_max = " << scheduler.low_register_max << "\n"
        << "scheduler.high_register_min = " << scheduler.high_register_min << "\n"
        << "scheduler.split_factor = " << scheduler.split_factor << "\n"
        << "scheduler.lead_in_ms = " << scheduler.lead_in_ms << "\n"
        << "scheduler.hazard_threshold_ms = " << scheduler.hazard_threshold_ms << "\n"
        << "synth.sample_rate_hz = " << synth.sample_rate_hz << "\n"
        << "synth.a4_hz = " << synth.a4_hz << "\n"
        << "synth.n_harmonics = " << synth.n_harmonics << "\n"
        << "synth.jet_gain_db = " << synth.jet_gain_db << "\n"
        << "synth.key_click_enabled = " << (synth.key_click_enabled ? "true" : "false") << "\n"
        << "synth.key_click_db = " << synth.key_click_db << "\n"
        << "synth.onset_ramp_ms = " << synth.onset_ramp_ms << "\n"
        << "synth.noise_seed = " << synth.noise_seed << "\n"
        << "analysis.tolerance_cents = " << analysis.tolerance_cents << "\n"
        << "analysis.frame_ms = " << analysis.frame_ms << "\n"
        << "analysis.hop_ms = " << analysis.hop_ms << "\n"
        << "analysis.fmin_hz = " << analysis.fmin_hz << "\n"
        << "analysis.fmax_hz = " << analysis.fmax_hz << "\n"
        << "analysis.fft_size = " << analysis.fft_size << "\n"
        << "analysis.trim_ms = " << analysis.trim_ms << "\n"
        << "analysis.search_cents = " << analysis.search_cents << "\n"
        << "analysis.spectrogram_window_ms = " << analysis.spectrogram_window_ms << "\n"
        << "analysis.spectrogram_hop_ms = " << analysis.spectrogram_hop_ms << "\n";
    return out.str();
}

std::uint64_t Config::hash() const {
    // FNV-1a, 64-bit.
    std::uint64_t h = 14695981039346656037ull;
    for (const char c : canonical_text()) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace flutesim
