#pragma once

#include <iosfwd>
#include <string>

#include "flutesim/config.hpp"

namespace flutesim {

// Exit codes shared by all commands: 0 clean, 2 hazards found (simulate)
// or empty notes found (analyze), 1 any error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFindings = 2;

/// parse + schedule: writes <out>/timeline.jsonl and <out>/hazards.json.
int cmd_simulate(const std::string& score_path, const Config& config, std::ostream& out);

/// parse + schedule + render: writes <out>/render_assist_{on,off}.wav.
int cmd_render(const std::string& score_path, const Config& config, bool assist_on,
               std::ostream& out);

/// analyze a WAV against a score: writes verdicts/harmonics JSON + CSV,
/// f0 track and spectrogram CSV dumps.
int cmd_analyze(const std::string& wav_path, const std::string& score_path,
                const Config& config, std::ostream& out);

/// Prints the fingering and head-joint maximum-BPM tables for a profile.
int cmd_bpm(const std::string& profile_path, std::ostream& out);

/// Merges the analyze outputs in <out> into <out>/summary.json.
int cmd_report(const Config& config, std::ostream& out);

} // namespace flutesim
