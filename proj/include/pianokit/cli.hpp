#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pianokit/core.hpp"
#include "pianokit/evaluation.hpp"
#include "pianokit/midi_io.hpp"

namespace pianokit::cli {

// Durations on the command line carry explicit units ("50ms", "0.05s");
// bare numbers are rejected. Throws std::invalid_argument.
double parse_duration(const std::string& text);

// Comma-separated tolerance list. Elements may carry units; a bare decimal
// means seconds, so the common "0.002,0.005,0.01" form works as-is.
std::vector<double> parse_duration_list(const std::string& text);

struct EncodeArgs {
    std::string midi_path;
    std::string out_dir;
    double hop_seconds = 0.01;
    int sharpness = 5;
};

struct DecodeArgs {
    std::string grid_dir;
    std::string out_midi;
    Thresholds thresholds;
    int ticks_per_quarter = 480;
    double tempo_bpm = 120.0;
};

struct EvalArgs {
    std::string ref_path;
    std::string est_path;
    double hop_seconds = 0.01; // frame-metric rasterization
    MatchConfig config;        // onset/offset/velocity tolerances
    std::string csv_path;      // optional: group,precision,recall,f1
    std::vector<double> sweep_onset;  // optional onset-tolerance sweep
    std::vector<double> sweep_offset; // optional offset-tolerance sweep
};

struct RoundtripArgs {
    std::string midi_path;
    double hop_seconds = 0.01;
    int sharpness = 5;
    double noise_half_width = 0.0; // perturb labels before encoding when > 0
    std::uint64_t seed = 0;
    Thresholds thresholds;
    int robustness_trials = 0;      // also run the idealized noise simulation
    std::string robustness_csv;     // optional trial dump
};

struct PerturbArgs {
    std::string midi_in;
    std::string midi_out;
    double noise_half_width = 0.05;
    std::uint64_t seed = 0;
    int ticks_per_quarter = 480;
    double tempo_bpm = 120.0;
};

struct SweepArgs {
    std::string ref_path;
    std::string est_path;
    SweepMode mode = SweepMode::Onset;
    std::vector<double> tolerances;
    std::string csv_path;
};

// Encode -> decode -> evaluate-against-original, all in memory.
struct RoundtripStats {
    size_t reference_notes = 0;
    size_t decoded_notes = 0;
    double note_f1 = 0.0;
    double note_offset_f1 = 0.0;
    double note_offset_velocity_f1 = 0.0;
    double max_onset_error = 0.0;  // seconds, over onset-matched pairs
    double mean_onset_error = 0.0;
    double max_offset_error = 0.0;
    int max_velocity_error = 0;

    bool has_pedals = false;
    size_t reference_pedals = 0;
    size_t decoded_pedals = 0;
    double pedal_f1 = 0.0;
    double pedal_offset_f1 = 0.0;
    double pedal_max_onset_error = 0.0;
    double pedal_max_offset_error = 0.0;
};

RoundtripStats roundtrip_stats(const NoteSequence& original, double hop_seconds, int sharpness,
                               double noise_half_width, std::uint64_t seed,
                               const Thresholds& thresholds);

// Command entry points. Results go to `out`, diagnostics to `err`; the return
// value is the process exit code (0 on success).
int run_encode(const EncodeArgs& args, std::ostream& out, std::ostream& err);
int run_decode(const DecodeArgs& args, std::ostream& out, std::ostream& err);
int run_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int run_roundtrip(const RoundtripArgs& args, std::ostream& out, std::ostream& err);
int run_perturb(const PerturbArgs& args, std::ostream& out, std::ostream& err);
int run_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);

} // namespace pianokit::cli
