#pragma once

#include <cstdint>
#include <string>

#include "flutesim/analysis.hpp"
#include "flutesim/scheduler.hpp"
#include "flutesim/synth.hpp"

namespace flutesim {

/// Flat `section.key = value` configuration. Environment variables are not
/// consulted; everything that affects a run is in the file (or defaults),
/// and the hash of the effective settings is stamped into every report.
struct Config {
    std::string fingering_table_path = "data/boehm_fingerings.txt";
    std::string actuation_profile_path = "profiles/paper_table1.profile";
    std::string output_dir = "out";

    SchedulerConfig scheduler;
    SynthConfig synth;
    AnalysisConfig analysis;

    static Config defaults();
    static Config load(const std::string& path);

    /// Applies one `section.key = value` assignment. Throws ConfigError on
    /// unknown keys or out-of-range values.
    void apply(const std::string& key, const std::string& value);

    /// Canonical text of the effective settings.
    std::string canonical_text() const;

    /// FNV-1a over canonical_text(); reports carry this for traceability.
    std::uint64_t hash() const;

    void validate() const;
};

} // namespace flutesim
