#include "flutesim/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "flutesim/analysis.hpp"
#include "flutesim/error.hpp"
#include "flutesim/scheduler.hpp"
#include "flutesim/score_io.hpp"
#include "flutesim/synth.hpp"
#include "flutesim/wav.hpp"

namespace flutesim {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string hash_string(const Config& config) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config.hash()));
    return buf;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out || !(out << text))
        throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
}

fs::path ensure_output_dir(const Config& config) {
    fs::path dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error(ErrorCode::IoError,
                    "cannot create output directory '" + dir.string() + "'");
    return dir;
}

AnalysisConfig analysis_config(const Config& config) {
    AnalysisConfig acfg = config.analysis;
    acfg.a4_hz = config.synth.a4_hz;
    return acfg;
}

json hazard_to_json(const Hazard& hz) {
    json j;
    j["from_index"] = hz.from_index;
    j["to_index"] = hz.to_index;
    j["transient_mask"] = hz.transient_mask.to_string();
    if (hz.sounding_as)
        j["sounding_as"] = *hz.sounding_as;
    else
        j["sounding_as"] = nullptr;
    j["window_ms"] = hz.window_ms;
    j["start_ms"] = hz.start_ms;
    return j;
}

std::string wav_stem(const std::string& wav_path) {
    return fs::path(wav_path).stem().string();
}

int run_guarded(std::ostream& out, const std::function<int()>& body) {
    try {
        return body();
    } catch (const Error& e) {
        out << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        out << "error: " << e.what() << "\n";
        return kExitError;
    }
}

} // namespace

int cmd_simulate(const std::string& score_path, const Config& config, std::ostream& out) {
    return run_guarded(out, [&]() {
        const Score score = load_score_file(score_path);
        const FingeringTable table = FingeringTable::load(config.fingering_table_path);
        const ActuationProfile profile = ActuationProfile::load(config.actuation_profile_path);

        const ActuationTimeline timeline = build_timeline(score, table, profile,
                                                          config.scheduler);
        const std::vector<Hazard> hazards =
            detect_transient_hazards(timeline, table, config.scheduler.hazard_threshold_ms);

        const fs::path dir = ensure_output_dir(config);
        write_text_file(dir / "timeline.jsonl", timeline_to_jsonl(timeline));

        json report;
        report["config_hash"] = hash_string(config);
        report["score"] = score_path;
        report["note_count"] = score.events.size();
        report["event_count"] = timeline.events.size();
        report["hazard_threshold_ms"] = config.scheduler.hazard_threshold_ms;
        report["hazards"] = json::array();
        for (const Hazard& hz : hazards) report["hazards"].push_back(hazard_to_json(hz));
        write_text_file(dir / "hazards.json", report.dump(2) + "\n");

        out << "notes: " << score.events.size() << ", actuation events: "
            << timeline.events.size() << "\n";
        out << "timeline: " << (dir / "timeline.jsonl").string() << "\n";
        if (hazards.empty()) {
            out << "no transient hazards above " << config.scheduler.hazard_threshold_ms
                << " ms\n";
            return kExitOk;
        }
        for (const Hazard& hz : hazards) {
            out << "hazard: notes " << hz.from_index << "->" << hz.to_index << " mask ["
                << hz.transient_mask.to_string() << "] for " << hz.window_ms << " ms";
            if (hz.sounding_as)
                out << " (sounds as " << midi_to_note_name(*hz.sounding_as) << ")";
            out << "\n";
        }
        return kExitFindings;
    });
}

int cmd_render(const std::string& score_path, const Config& config, bool assist_on,
               std::ostream& out) {
    return run_guarded(out, [&]() {
        const Score score = load_score_file(score_path);
        const FingeringTable table = FingeringTable::load(config.fingering_table_path);
        const ActuationProfile profile = ActuationProfile::load(config.actuation_profile_path);

        SchedulerConfig scfg = config.scheduler;
        scfg.include_head_joint = assist_on;
        const ActuationTimeline timeline = build_timeline(score, table, profile, scfg);
        const AudioBuffer audio = render(timeline, table, config.synth);

        const fs::path dir = ensure_output_dir(config);
        const fs::path wav_path =
            dir / (std::string("render_assist_") + (assist_on ? "on" : "off") + ".wav");
        write_wav(audio, wav_path.string());
        out << "wrote " << wav_path.string() << " (" << audio.samples.size() << " samples, "
            << std::fixed << std::setprecision(2) << audio.duration_ms() / 1000.0 << " s)\n";
        return kExitOk;
    });
}

int cmd_analyze(const std::string& wav_path, const std::string& score_path,
                const Config& config, std::ostream& out) {
    return run_guarded(out, [&]() {
        const AudioBuffer audio = read_wav(wav_path);
        const Score score = load_score_file(score_path);
        const AnalysisConfig acfg = analysis_config(config);
        const double offset = config.scheduler.lead_in_ms;

        const F0Track track = estimate_f0(audio, acfg);
        const std::vector<PitchVerdict> verdicts = verify_pitch(track, score, acfg, offset);
        const std::vector<HarmonicReport> harmonics =
            harmonic_reports(audio, score, acfg, offset);
        const Spectrogram spec = spectrogram(audio, acfg.spectrogram_window_ms,
                                             acfg.spectrogram_hop_ms);

        const fs::path dir = ensure_output_dir(config);
        const std::string stem = wav_stem(wav_path);

        json verdicts_json;
        verdicts_json["config_hash"] = hash_string(config);
        verdicts_json["wav"] = wav_path;
        verdicts_json["score"] = score_path;
        verdicts_json["tolerance_cents"] = acfg.tolerance_cents;
        verdicts_json["verdicts"] = json::array();
        std::ostringstream verdicts_csv;
        verdicts_csv << "note_index,midi_note,target_hz,median_f0_hz,deviation_cents,pass,"
                        "empty_note,unintended_pitch,unstable_onset,breath\n";
        int passed = 0, empty = 0;
        for (const PitchVerdict& v : verdicts) {
            json j;
            j["note_index"] = v.note_index;
            j["midi_note"] = v.midi_note;
            j["note"] = midi_to_note_name(v.midi_note);
            j["target_hz"] = v.target_hz;
            if (v.empty_note) {
                j["median_f0_hz"] = nullptr;
                j["deviation_cents"] = nullptr;
            } else {
                j["median_f0_hz"] = v.median_f0_hz;
                j["deviation_cents"] = v.deviation_cents;
            }
            j["pass"] = v.pass;
            j["empty_note"] = v.empty_note;
            j["unintended_pitch"] = v.unintended_pitch;
            j["unstable_onset"] = v.unstable_onset;
            j["breath"] = v.breath;
            verdicts_json["verdicts"].push_back(j);

            verdicts_csv << v.note_index << "," << v.midi_note << "," << v.target_hz << ","
                         << v.median_f0_hz << "," << v.deviation_cents << "," << v.pass << ","
                         << v.empty_note << "," << v.unintended_pitch << ","
                         << v.unstable_onset << "," << v.breath << "\n";
            if (v.pass) ++passed;
            if (v.empty_note) ++empty;
        }
        write_text_file(dir / (stem + ".verdicts.json"), verdicts_json.dump(2) + "\n");
        write_text_file(dir / (stem + ".verdicts.csv"), verdicts_csv.str());

        json harm_json;
        harm_json["config_hash"] = hash_string(config);
        harm_json["wav"] = wav_path;
        harm_json["reports"] = json::array();
        std::ostringstream harm_csv;
        harm_csv << "note_index,midi_note,register,f0_hz,spl2_db,spl3_db,delta_spl_db\n";
        for (const HarmonicReport& r : harmonics) {
            const int midi = score.events[static_cast<std::size_t>(r.note_index)].midi_note;
            const Register reg = classify_register(midi, config.scheduler.low_register_max,
                                                   config.scheduler.high_register_min);
            json j;
            j["note_index"] = r.note_index;
            j["midi_note"] = midi;
            j["register"] = register_name(reg);
            j["f0_hz"] = r.f0_hz;
            j["spl2_db"] = r.spl2_db;
            j["spl3_db"] = r.spl3_db;
            j["delta_spl_db"] = r.delta_spl_db();
            harm_json["reports"].push_back(j);
            harm_csv << r.note_index << "," << midi << "," << register_name(reg) << ","
                     << r.f0_hz << "," << r.spl2_db << "," << r.spl3_db << ","
                     << r.delta_spl_db() << "\n";
        }
        write_text_file(dir / (stem + ".harmonics.json"), harm_json.dump(2) + "\n");
        write_text_file(dir / (stem + ".harmonics.csv"), harm_csv.str());

        std::ostringstream f0_csv;
        f0_csv << "time_ms,voiced,f0_hz\n";
        for (const F0Frame& f : track.frames)
            f0_csv << f.time_ms << "," << (f.voiced ? 1 : 0) << "," << f.f0_hz << "\n";
        write_text_file(dir / (stem + ".f0.csv"), f0_csv.str());

        std::ostringstream spec_csv;
        spec_csv << "time_ms";
        for (double f : spec.freqs_hz) spec_csv << "," << f;
        spec_csv << "\n";
        for (std::size_t t = 0; t < spec.times_ms.size(); ++t) {
            spec_csv << spec.times_ms[t];
            for (double db : spec.magnitude_db[t]) spec_csv << "," << db;
            spec_csv << "\n";
        }
        write_text_file(dir / (stem + ".spectrogram.csv"), spec_csv.str());

        out << passed << "/" << verdicts.size() << " notes within " << acfg.tolerance_cents
            << " cents";
        if (empty > 0) out << ", " << empty << " without any voiced frames";
        out << "\n";
        out << "reports: " << (dir / (stem + ".verdicts.json")).string() << " (+csv, "
            << "harmonics, f0, spectrogram)\n";

        if (empty > 0) return kExitError;
        if (passed != static_cast<int>(verdicts.size())) return kExitFindings;
        return kExitOk;
    });
}

int cmd_bpm(const std::string& profile_path, std::ostream& out) {
    return run_guarded(out, [&]() {
        const ActuationProfile profile = ActuationProfile::load(profile_path);

        const auto print_table = [&](const std::string& title, double limit_ms) {
            out << title << "\n";
            out << "  note value   max BPM   one measure [s]\n";
            const std::pair<const char*, NoteValue> rows[] = {
                {"quarter", NoteValue::Quarter},
                {"eighth", NoteValue::Eighth},
                {"sixteenth", NoteValue::Sixteenth},
            };
            char measure[32];
            std::snprintf(measure, sizeof(measure), "%.2f", measure_duration_s(limit_ms));
            bool first = true;
            for (const auto& [name, value] : rows) {
                const long bpm = max_bpm(limit_ms, value);
                char line[96];
                if (bpm < 1)
                    std::snprintf(line, sizeof(line), "  %-12s %-9s %s\n", name, "infeasible",
                                  first ? measure : "");
                else
                    std::snprintf(line, sizeof(line), "  %-12s %-9ld %s\n", name, bpm,
                                  first ? measure : "");
                out << line;
                first = false;
            }
        };

        char limit[64];
        std::snprintf(limit, sizeof(limit), "%.2f", profile.slowest_key_ms());
        print_table(std::string("Fingering mechanism (limit: ") +
                        key_id_name(profile.slowest_key()) + " key, " + limit + " ms)",
                    profile.slowest_key_ms());
        std::snprintf(limit, sizeof(limit), "%.2f", profile.head_joint_ms);
        print_table(std::string("Head joint (limit: ") + limit + " ms)",
                    profile.head_joint_ms);
        return kExitOk;
    });
}

int cmd_report(const Config& config, std::ostream& out) {
    return run_guarded(out, [&]() {
        const fs::path dir(config.output_dir);
        if (!fs::exists(dir))
            throw Error(ErrorCode::IoError, "output directory '" + dir.string() +
                                               "' does not exist");

        json summary;
        summary["config_hash"] = hash_string(config);
        summary["analyses"] = json::array();

        std::vector<fs::path> verdict_files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string name = entry.path().filename().string();
            if (name.size() > 14 && name.ends_with(".verdicts.json"))
                verdict_files.push_back(entry.path());
        }
        std::sort(verdict_files.begin(), verdict_files.end());

        for (const fs::path& path : verdict_files) {
            std::ifstream in(path);
            json doc = json::parse(in);
            int passed = 0, empty = 0;
            for (const json& v : doc["verdicts"]) {
                if (v["pass"].get<bool>()) ++passed;
                if (v["empty_note"].get<bool>()) ++empty;
            }
            json item;
            item["file"] = path.filename().string();
            item["notes"] = doc["verdicts"].size();
            item["passed"] = passed;
            item["empty_notes"] = empty;
            summary["analyses"].push_back(item);
        }

        // Assist on/off harmonic comparison, when both renders were analyzed.
        const fs::path on_path = dir / "render_assist_on.harmonics.json";
        const fs::path off_path = dir / "render_assist_off.harmonics.json";
        if (fs::exists(on_path) && fs::exists(off_path)) {
            std::ifstream on_in(on_path), off_in(off_path);
            const json on_doc = json::parse(on_in);
            const json off_doc = json::parse(off_in);
            if (on_doc["reports"].size() != off_doc["reports"].size())
                throw Error(ErrorCode::LengthMismatch,
                            "assist on/off harmonic reports differ in length");
            json rows = json::array();
            bool all_low_up = true, middle_flat = true;
            for (std::size_t i = 0; i < on_doc["reports"].size(); ++i) {
                const json& a = on_doc["reports"][i];
                const json& b = off_doc["reports"][i];
                const double diff =
                    a["delta_spl_db"].get<double>() - b["delta_spl_db"].get<double>();
                const std::string reg = a["register"].get<std::string>();
                if (reg == "low" && diff <= 0.0) all_low_up = false;
                if (reg == "middle" && std::abs(diff) >= 0.5) middle_flat = false;
                json row;
                row["note_index"] = a["note_index"];
                row["register"] = reg;
                row["delta_on_db"] = a["delta_spl_db"];
                row["delta_off_db"] = b["delta_spl_db"];
                row["difference_db"] = diff;
                rows.push_back(row);
            }
            json cmp;
            cmp["per_note"] = rows;
            cmp["all_low_increased"] = all_low_up;
            cmp["middle_unchanged"] = middle_flat;
            summary["delta_spl_comparison"] = cmp;
        }

        const fs::path hazards_path = dir / "hazards.json";
        if (fs::exists(hazards_path)) {
            std::ifstream in(hazards_path);
            const json doc = json::parse(in);
            summary["hazards"] = doc["hazards"].size();
        }

        write_text_file(dir / "summary.json", summary.dump(2) + "\n");
        out << "wrote " << (dir / "summary.json").string() << "\n";
        return kExitOk;
    });
}

} // namespace flutesim
