#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "flutesim/commands.hpp"
#include "flutesim/config.hpp"
#include "flutesim/error.hpp"

int main(int argc, char** argv) {
    CLI::App app{"flutesim - MIDI-driven flute robot simulator and acoustic analyzer"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    std::string config_path;
    std::string out_dir;
    app.add_option("--config", config_path, "configuration file (section.key = value lines)");
    app.add_option("--out", out_dir, "output directory (overrides config)");

    std::string score_path, wav_path, profile_path;
    std::string assist = "on";
    unsigned long long seed = 0;
    bool seed_set = false;

    CLI::App* simulate = app.add_subcommand(
        "simulate", "schedule a score into an actuation timeline and list hazards");
    simulate->add_option("score", score_path, "score file (SMF or text)")->required();

    CLI::App* render_cmd =
        app.add_subcommand("render", "render a score through the flute synthesizer");
    render_cmd->add_option("score", score_path, "score file (SMF or text)")->required();
    render_cmd->add_option("--assist", assist, "head-joint assist: on|off")
        ->check(CLI::IsMember({"on", "off"}));
    render_cmd->add_option("--seed", seed, "noise seed")->each([&](const std::string&) {
        seed_set = true;
    });

    CLI::App* analyze = app.add_subcommand(
        "analyze", "estimate f0, verify pitches and harmonic levels of a recording");
    analyze->add_option("wav", wav_path, "16-bit PCM mono WAV file")->required();
    analyze->add_option("score", score_path, "reference score file")->required();

    CLI::App* bpm = app.add_subcommand(
        "bpm", "print the theoretical maximum BPM tables for an actuation profile");
    bpm->add_option("profile", profile_path, "actuation profile file")->required();

    CLI::App* report =
        app.add_subcommand("report", "merge analyze outputs into one summary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        flutesim::Config config = config_path.empty() ? flutesim::Config::defaults()
                                                      : flutesim::Config::load(config_path);
        if (!out_dir.empty()) config.output_dir = out_dir;
        if (seed_set) config.synth.noise_seed = seed;
        config.validate();

        if (simulate->parsed())
            return flutesim::cmd_simulate(score_path, config, std::cout);
        if (render_cmd->parsed())
            return flutesim::cmd_render(score_path, config, assist == "on", std::cout);
        if (analyze->parsed())
            return flutesim::cmd_analyze(wav_path, score_path, config, std::cout);
        if (bpm->parsed())
            return flutesim::cmd_bpm(profile_path, std::cout);
        if (report->parsed())
            return flutesim::cmd_report(config, std::cout);
    } catch (const flutesim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return flutesim::kExitError;
    }
    return flutesim::kExitError;
}
