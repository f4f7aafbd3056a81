#include "flutesim/actuation_profile.hpp"

#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "flutesim/error.hpp"
#include "text_util.hpp"

namespace flutesim {

double ActuationProfile::slowest_key_ms() const {
    return latency(slowest_key()).key_ms;
}

KeyId ActuationProfile::slowest_key() const {
    int best = 0;
    for (int i = 1; i < kKeyCount; ++i)
        if (keys[i].key_ms > keys[best].key_ms) best = i;
    return static_cast<KeyId>(best);
}

ActuationProfile ActuationProfile::parse(const std::string& text) {
    ActuationProfile profile;
    std::array<bool, kKeyCount> seen{};
    bool have_head_motor = false, have_head_joint = false;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_comment(line);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;

        const auto fail = [&](const std::string& what) -> Error {
            return Error(ErrorCode::ConfigError,
                         "profile line " + std::to_string(line_no) + ": " + what);
        };

        if (first.rfind("head.", 0) == 0) {
            double v = 0.0;
            if (!(ls >> v)) throw fail("missing value");
            if (first == "head.motor_ms") {
                profile.head_motor_ms = v;
                have_head_motor = true;
            } else if (first == "head.motor_sd_ms") {
                profile.head_motor_sd_ms = v;
            } else if (first == "head.joint_ms") {
                profile.head_joint_ms = v;
                have_head_joint = true;
            } else if (first == "head.joint_sd_ms") {
                profile.head_joint_sd_ms = v;
            } else if (first == "head.angle_deg") {
                profile.head_angle_deg = v;
            } else {
                throw fail("unknown head entry '" + first + "'");
            }
            continue;
        }

        const auto key = key_id_from_name(first);
        if (!key) throw fail("unknown key '" + first + "'");
        KeyLatency lat;
        if (!(ls >> lat.motor_ms >> lat.motor_sd_ms >> lat.key_ms >> lat.key_sd_ms))
            throw fail("expected: <key> <motor_ms> <motor_sd_ms> <key_ms> <key_sd_ms>");
        if (!(lat.key_ms > 0.0) || !(lat.motor_ms > 0.0))
            throw fail("movement times must be positive");
        if (lat.motor_sd_ms < 0.0 || lat.key_sd_ms < 0.0)
            throw fail("standard deviations must be non-negative");
        if (lat.motor_ms < lat.key_ms)
            throw fail("motor_ms must be >= key_ms for '" + first + "'");
        profile.keys[static_cast<std::size_t>(*key)] = lat;
        seen[static_cast<std::size_t>(*key)] = true;
    }

    for (int i = 0; i < kKeyCount; ++i)
        if (!seen[i])
            throw Error(ErrorCode::ConfigError,
                        std::string("profile missing key row '") +
                            key_id_name(static_cast<KeyId>(i)) + "'");
    if (!have_head_motor || !have_head_joint)
        throw Error(ErrorCode::ConfigError, "profile missing head joint entries");
    if (profile.head_motor_ms < profile.head_joint_ms)
        throw Error(ErrorCode::ConfigError, "head.motor_ms must be >= head.joint_ms");
    return profile;
}

ActuationProfile ActuationProfile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open profile '" + path + "'");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse(data);
}

std::string ActuationProfile::serialize() const {
    std::ostringstream out;
    out << "# columns: key  motor_ms  motor_sd_ms  key_ms  key_sd_ms\n";
    out << std::fixed << std::setprecision(2);
    for (int i = 0; i < kKeyCount; ++i) {
        const KeyLatency& k = keys[i];
        out << key_id_name(static_cast<KeyId>(i)) << " " << k.motor_ms << " " << k.motor_sd_ms
            << " " << k.key_ms << " " << k.key_sd_ms << "\n";
    }
    out << "head.motor_ms " << head_motor_ms << "\n";
    out << "head.motor_sd_ms " << head_motor_sd_ms << "\n";
    out << "head.joint_ms " << head_joint_ms << "\n";
    out << "head.joint_sd_ms " << head_joint_sd_ms << "\n";
    out << "head.angle_deg " << head_angle_deg << "\n";
    return out.str();
}

ActuationProfile ActuationProfile::uniform(double motor_ms, double key_ms) {
    if (!(key_ms > 0.0) || motor_ms < key_ms)
        throw Error(ErrorCode::DomainError, "uniform profile needs motor_ms >= key_ms > 0");
    ActuationProfile profile;
    for (auto& k : profile.keys) k = {motor_ms, 0.0, key_ms, 0.0};
    return profile;
}

} // namespace flutesim
