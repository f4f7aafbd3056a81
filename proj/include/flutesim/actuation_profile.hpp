#pragma once

#include <array>
#include <string>

#include "flutesim/fingering.hpp"

namespace flutesim {

/// Measured movement times for one key: the motor interval (command to
/// cessation) and the key/lever travel interval contained within it.
struct KeyLatency {
    double motor_ms = 0.0;
    double motor_sd_ms = 0.0;
    double key_ms = 0.0;
    double key_sd_ms = 0.0;
};

/// Per-key latencies for all 14 actuators plus the head-joint drive.
struct ActuationProfile {
    std::array<KeyLatency, kKeyCount> keys{};
    double head_motor_ms = 73.33;
    double head_motor_sd_ms = 2.04;
    double head_joint_ms = 40.00;
    double head_joint_sd_ms = 2.04;
    double head_angle_deg = 22.0;

    const KeyLatency& latency(KeyId key) const {
        return keys[static_cast<std::size_t>(key)];
    }

    /// Longest key/lever travel time across all 14 actuators.
    double slowest_key_ms() const;
    KeyId slowest_key() const;

    /// Row-oriented text format; every key row must be present and satisfy
    /// motor_ms >= key_ms > 0. Throws ConfigError / DomainError.
    static ActuationProfile load(const std::string& path);
    static ActuationProfile parse(const std::string& text);
    std::string serialize() const;

    /// A degenerate profile with identical rows, used by property tests.
    static ActuationProfile uniform(double motor_ms, double key_ms);
};

} // namespace flutesim
