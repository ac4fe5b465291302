#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pianokit/cli.hpp"

namespace cli = pianokit::cli;

namespace {

// Duration flags take strings with explicit units and convert on parse, so a
// bad unit fails before any command runs.
void add_duration_flag(CLI::App* app, const std::string& name, double& target,
                       const std::string& description, bool allow_zero = false) {
    app->add_option_function<std::string>(
           name,
           [&target, allow_zero, name](const std::string& text) {
               const double value = cli::parse_duration(text);
               if (!allow_zero && value <= 0.0) {
                   throw CLI::ValidationError(name + ": duration must be positive");
               }
               target = value;
           },
           description)
        ->type_name("DURATION");
}

void add_threshold_flags(CLI::App* app, pianokit::Thresholds& thresholds) {
    app->add_option("--onset-threshold", thresholds.onset, "onset decision threshold");
    app->add_option("--offset-threshold", thresholds.offset, "offset decision threshold");
    app->add_option("--frame-threshold", thresholds.frame, "frame decision threshold");
    app->add_option("--pedal-onset-threshold", thresholds.pedal_onset,
                    "pedal onset decision threshold");
    app->add_option("--pedal-offset-threshold", thresholds.pedal_offset,
                    "pedal offset decision threshold");
    app->add_option("--pedal-frame-threshold", thresholds.pedal_frame,
                    "pedal frame decision threshold");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Piano transcription grid encoding, decoding and evaluation"};
    app.require_subcommand(1);

    cli::EncodeArgs encode;
    CLI::App* encode_cmd =
        app.add_subcommand("encode", "encode a MIDI file into target grid bundles");
    encode_cmd->add_option("midi", encode.midi_path, "input MIDI file")->required();
    encode_cmd->add_option("--out,-o", encode.out_dir, "output bundle directory")->required();
    add_duration_flag(encode_cmd, "--hop", encode.hop_seconds, "frame hop (default 10ms)");
    encode_cmd->add_option("--sharpness,-J", encode.sharpness,
                           "regression sharpness J (default 5)");

    cli::DecodeArgs decode;
    CLI::App* decode_cmd =
        app.add_subcommand("decode", "decode a grid bundle directory into a MIDI file");
    decode_cmd->add_option("grids", decode.grid_dir, "grid bundle directory")->required();
    decode_cmd->add_option("--out,-o", decode.out_midi, "output MIDI file")->required();
    decode_cmd->add_option("--tpq", decode.ticks_per_quarter, "MIDI ticks per quarter");
    decode_cmd->add_option("--tempo", decode.tempo_bpm, "MIDI tempo in BPM");
    add_threshold_flags(decode_cmd, decode.thresholds);

    cli::EvalArgs eval;
    std::string sweep_onset_text;
    std::string sweep_offset_text;
    CLI::App* eval_cmd =
        app.add_subcommand("eval", "evaluate an estimated MIDI file against a reference");
    eval_cmd->add_option("reference", eval.ref_path, "reference MIDI file")->required();
    eval_cmd->add_option("estimate", eval.est_path, "estimated MIDI file")->required();
    add_duration_flag(eval_cmd, "--hop", eval.hop_seconds,
                      "hop for frame-level rasterization (default 10ms)");
    add_duration_flag(eval_cmd, "--onset-tolerance", eval.config.onset_tolerance_seconds,
                      "onset tolerance (default 50ms)");
    add_duration_flag(eval_cmd, "--offset-tolerance", eval.config.offset_tolerance_seconds,
                      "offset tolerance (default 50ms)");
    eval_cmd->add_option("--offset-ratio", eval.config.offset_ratio,
                         "offset window as a fraction of note duration (default 0.2)");
    eval_cmd->add_option("--velocity-tolerance", eval.config.velocity_tolerance,
                         "velocity tolerance after normalization (default 0.1)");
    eval_cmd->add_option("--csv", eval.csv_path, "write the metric groups as CSV");
    eval_cmd->add_option("--sweep-onset", sweep_onset_text,
                         "comma-separated onset tolerances (bare numbers are seconds)");
    eval_cmd->add_option("--sweep-offset", sweep_offset_text,
                         "comma-separated offset tolerances (bare numbers are seconds)");

    cli::RoundtripArgs roundtrip;
    CLI::App* roundtrip_cmd = app.add_subcommand(
        "roundtrip", "encode, decode and evaluate a MIDI file against itself");
    roundtrip_cmd->add_option("midi", roundtrip.midi_path, "input MIDI file")->required();
    add_duration_flag(roundtrip_cmd, "--hop", roundtrip.hop_seconds,
                      "frame hop (default 10ms)");
    roundtrip_cmd->add_option("--sharpness,-J", roundtrip.sharpness,
                              "regression sharpness J (default 5)");
    add_duration_flag(roundtrip_cmd, "--noise", roundtrip.noise_half_width,
                      "uniform label shift half-width (default off)", true);
    roundtrip_cmd->add_option("--seed", roundtrip.seed, "noise seed");
    roundtrip_cmd->add_option("--robustness-trials", roundtrip.robustness_trials,
                              "also run the idealized noise simulation");
    roundtrip_cmd->add_option("--robustness-csv", roundtrip.robustness_csv,
                              "write per-trial simulation rows as CSV");
    add_threshold_flags(roundtrip_cmd, roundtrip.thresholds);

    cli::PerturbArgs perturb;
    CLI::App* perturb_cmd =
        app.add_subcommand("perturb", "shift note and pedal times by uniform noise");
    perturb_cmd->add_option("midi", perturb.midi_in, "input MIDI file")->required();
    perturb_cmd->add_option("out", perturb.midi_out, "output MIDI file")->required();
    add_duration_flag(perturb_cmd, "--noise", perturb.noise_half_width,
                      "uniform shift half-width (default 50ms)");
    perturb_cmd->add_option("--seed", perturb.seed, "noise seed");
    perturb_cmd->add_option("--tpq", perturb.ticks_per_quarter, "MIDI ticks per quarter");
    perturb_cmd->add_option("--tempo", perturb.tempo_bpm, "MIDI tempo in BPM");

    cli::SweepArgs sweep;
    std::string sweep_onset_list;
    std::string sweep_offset_list;
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "evaluate one pair across a tolerance grid");
    sweep_cmd->add_option("reference", sweep.ref_path, "reference MIDI file")->required();
    sweep_cmd->add_option("estimate", sweep.est_path, "estimated MIDI file")->required();
    CLI::Option* onset_opt = sweep_cmd->add_option(
        "--onset", sweep_onset_list, "onset tolerances (bare numbers are seconds)");
    CLI::Option* offset_opt = sweep_cmd->add_option(
        "--offset", sweep_offset_list, "offset tolerances (bare numbers are seconds)");
    onset_opt->excludes(offset_opt);
    sweep_cmd->add_option("--csv", sweep.csv_path, "write sweep rows as CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (encode_cmd->parsed()) {
            return cli::run_encode(encode, std::cout, std::cerr);
        }
        if (decode_cmd->parsed()) {
            return cli::run_decode(decode, std::cout, std::cerr);
        }
        if (eval_cmd->parsed()) {
            if (!sweep_onset_text.empty()) {
                eval.sweep_onset = cli::parse_duration_list(sweep_onset_text);
            }
            if (!sweep_offset_text.empty()) {
                eval.sweep_offset = cli::parse_duration_list(sweep_offset_text);
            }
            return cli::run_eval(eval, std::cout, std::cerr);
        }
        if (roundtrip_cmd->parsed()) {
            return cli::run_roundtrip(roundtrip, std::cout, std::cerr);
        }
        if (perturb_cmd->parsed()) {
            return cli::run_perturb(perturb, std::cout, std::cerr);
        }
        if (sweep_cmd->parsed()) {
            if (sweep_onset_list.empty() && sweep_offset_list.empty()) {
                std::cerr << "error: sweep needs --onset or --offset\n";
                return 1;
            }
            if (!sweep_onset_list.empty()) {
                sweep.mode = pianokit::SweepMode::Onset;
                sweep.tolerances = cli::parse_duration_list(sweep_onset_list);
            } else {
                sweep.mode = pianokit::SweepMode::Offset;
                sweep.tolerances = cli::parse_duration_list(sweep_offset_list);
            }
            return cli::run_sweep(sweep, std::cout, std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
