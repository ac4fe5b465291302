#include "pianokit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "pianokit/grid_io.hpp"
#include "pianokit/noise_lab.hpp"
#include "pianokit/note_decoder.hpp"
#include "pianokit/pedal_decoder.hpp"
#include "pianokit/target_encoder.hpp"

namespace fs = std::filesystem;

namespace pianokit::cli {
namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) {
        throw std::runtime_error("cannot open " + path);
    }
    const std::streamsize size = f.tellg();
    f.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<size_t>(size));
    f.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!f) {
        throw std::runtime_error("failed reading " + path);
    }
    return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) {
        throw std::runtime_error("failed writing " + path);
    }
}

NoteSequence parse_midi_file(const std::string& path) {
    try {
        return parse_midi(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

int frames_for_duration(double duration_seconds, double hop_seconds) {
    const int frames =
        static_cast<int>(std::ceil(duration_seconds / hop_seconds - 1e-9)) + 1;
    return std::max(frames, 1);
}

std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%7.2f", fraction * 100.0);
    return buf;
}

void print_metric_row(std::ostream& out, const std::string& label, const EvalResult& r) {
    out << label;
    for (size_t i = label.size(); i < 28; ++i) out << ' ';
    out << percent(r.precision) << ' ' << percent(r.recall) << ' ' << percent(r.f1) << '\n';
}

void print_sweep(std::ostream& out, const std::vector<std::pair<double, EvalResult>>& rows) {
    out << "tolerance,precision,recall,f1\n";
    char buf[128];
    for (const auto& [tolerance, r] : rows) {
        std::snprintf(buf, sizeof buf, "%.9g,%.6f,%.6f,%.6f\n", tolerance, r.precision,
                      r.recall, r.f1);
        out << buf;
    }
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        fn();
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace

double parse_duration(const std::string& text) {
    size_t parsed = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &parsed);
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid duration \"" + text + "\"");
    }
    const std::string unit = text.substr(parsed);
    if (unit == "ms") {
        value *= 1e-3;
    } else if (unit == "us") {
        value *= 1e-6;
    } else if (unit != "s") {
        throw std::invalid_argument("duration \"" + text +
                                    "\" needs an explicit unit (e.g. \"50ms\", \"0.05s\")");
    }
    if (!std::isfinite(value) || value < 0.0) {
        throw std::invalid_argument("duration \"" + text + "\" must be non-negative");
    }
    return value;
}

std::vector<double> parse_duration_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.empty()) {
            throw std::invalid_argument("empty element in duration list \"" + text + "\"");
        }
        const bool has_unit = item.find_first_not_of("0123456789.eE+-") != std::string::npos;
        if (has_unit) {
            values.push_back(parse_duration(item));
        } else {
            size_t parsed = 0;
            double value = 0.0;
            try {
                value = std::stod(item, &parsed);
            } catch (const std::exception&) {
                throw std::invalid_argument("invalid duration \"" + item + "\"");
            }
            if (parsed != item.size() || !std::isfinite(value)) {
                throw std::invalid_argument("invalid duration \"" + item + "\"");
            }
            values.push_back(value); // bare list elements are seconds
        }
    }
    if (values.empty()) {
        throw std::invalid_argument("empty duration list");
    }
    return values;
}

RoundtripStats roundtrip_stats(const NoteSequence& original, double hop_seconds, int sharpness,
                               double noise_half_width, std::uint64_t seed,
                               const Thresholds& thresholds) {
    NoteSequence labels = original;
    if (noise_half_width > 0.0) {
        labels = perturb_events(original, NoiseConfig{noise_half_width, seed});
    }
    const int num_frames = frames_for_duration(labels.duration_seconds, hop_seconds);
    const TimeGrid note_grid(hop_seconds, num_frames, kNumPianoKeys);

    EncodedNoteTargets targets = encode_note_targets(labels, note_grid, sharpness);
    const NoteGridBundle bundle{std::move(targets.frame_roll), std::move(targets.onset_reg),
                                std::move(targets.offset_reg),
                                std::move(targets.velocity_roll)};
    const std::vector<NoteEvent> decoded = decode_notes(bundle, thresholds);

    RoundtripStats stats;
    stats.reference_notes = original.notes.size();
    stats.decoded_notes = decoded.size();

    MatchConfig onset_only;
    const EvalResult onset_result = match_notes(original.notes, decoded, onset_only);
    stats.note_f1 = onset_result.f1;

    MatchConfig with_offset = onset_only;
    with_offset.use_offset = true;
    stats.note_offset_f1 = match_notes(original.notes, decoded, with_offset).f1;

    MatchConfig with_velocity = with_offset;
    with_velocity.use_velocity = true;
    stats.note_offset_velocity_f1 = match_notes(original.notes, decoded, with_velocity).f1;

    double onset_error_sum = 0.0;
    for (const auto& [r, e] : onset_result.matched_pairs) {
        const double onset_error =
            std::abs(original.notes[r].onset_seconds - decoded[e].onset_seconds);
        const double offset_error =
            std::abs(original.notes[r].offset_seconds - decoded[e].offset_seconds);
        const int velocity_error = std::abs(original.notes[r].velocity - decoded[e].velocity);
        stats.max_onset_error = std::max(stats.max_onset_error, onset_error);
        stats.max_offset_error = std::max(stats.max_offset_error, offset_error);
        stats.max_velocity_error = std::max(stats.max_velocity_error, velocity_error);
        onset_error_sum += onset_error;
    }
    if (!onset_result.matched_pairs.empty()) {
        stats.mean_onset_error =
            onset_error_sum / static_cast<double>(onset_result.matched_pairs.size());
    }

    stats.has_pedals = !original.pedals.empty() || !labels.pedals.empty();
    if (stats.has_pedals) {
        const TimeGrid pedal_grid(hop_seconds, num_frames, 1);
        EncodedPedalTargets pedal_targets = encode_pedal_targets(labels, pedal_grid, sharpness);
        const PedalGridBundle pedal_bundle{std::move(pedal_targets.frame_roll),
                                           std::move(pedal_targets.onset_reg),
                                           std::move(pedal_targets.offset_reg)};
        const std::vector<PedalEvent> decoded_pedals = decode_pedals(pedal_bundle, thresholds);

        stats.reference_pedals = original.pedals.size();
        stats.decoded_pedals = decoded_pedals.size();
        const EvalResult pedal_result =
            match_pedals(original.pedals, decoded_pedals, onset_only);
        stats.pedal_f1 = pedal_result.f1;
        stats.pedal_offset_f1 = match_pedals(original.pedals, decoded_pedals, with_offset).f1;
        for (const auto& [r, e] : pedal_result.matched_pairs) {
            stats.pedal_max_onset_error =
                std::max(stats.pedal_max_onset_error,
                         std::abs(original.pedals[r].onset_seconds -
                                  decoded_pedals[e].onset_seconds));
            stats.pedal_max_offset_error =
                std::max(stats.pedal_max_offset_error,
                         std::abs(original.pedals[r].offset_seconds -
                                  decoded_pedals[e].offset_seconds));
        }
    }
    return stats;
}

int run_encode(const EncodeArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (args.sharpness < 1) {
            throw std::invalid_argument("sharpness must be >= 1");
        }
        if (!(args.hop_seconds > 0.0)) {
            throw std::invalid_argument("hop must be positive");
        }
        const NoteSequence seq = parse_midi_file(args.midi_path);
        const int num_frames = frames_for_duration(seq.duration_seconds, args.hop_seconds);

        const TimeGrid note_grid(args.hop_seconds, num_frames, kNumPianoKeys);
        EncodedNoteTargets notes = encode_note_targets(seq, note_grid, args.sharpness);
        const TimeGrid pedal_grid(args.hop_seconds, num_frames, 1);
        EncodedPedalTargets pedals = encode_pedal_targets(seq, pedal_grid, args.sharpness);

        const fs::path dir(args.out_dir);
        fs::create_directories(dir);
        write_grid_file(dir / bundle_files::kFrame, notes.frame_roll);
        write_grid_file(dir / bundle_files::kOnset, notes.onset_reg);
        write_grid_file(dir / bundle_files::kOffset, notes.offset_reg);
        write_grid_file(dir / bundle_files::kVelocity, notes.velocity_roll);
        write_grid_file(dir / bundle_files::kPedalFrame, pedals.frame_roll);
        write_grid_file(dir / bundle_files::kPedalOnset, pedals.onset_reg);
        write_grid_file(dir / bundle_files::kPedalOffset, pedals.offset_reg);

        out << "note grids: " << num_frames << " frames x " << kNumPianoKeys
            << " keys (hop " << std::llround(args.hop_seconds * 1e6) << " us)\n";
        out << "pedal grids: " << num_frames << " frames x 1 key\n";
        out << "wrote 7 grid files to " << dir.string() << '\n';
    });
}

int run_decode(const DecodeArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        args.thresholds.validate();
        const fs::path dir(args.grid_dir);

        std::vector<std::string> missing;
        for (const char* name : {bundle_files::kFrame, bundle_files::kOnset,
                                 bundle_files::kOffset, bundle_files::kVelocity}) {
            if (!fs::exists(dir / name)) missing.push_back(name);
        }
        if (!missing.empty()) {
            std::string list;
            for (const std::string& name : missing) {
                if (!list.empty()) list += ", ";
                list += name;
            }
            throw std::runtime_error("grid bundle in " + dir.string() +
                                     " is missing: " + list);
        }

        const NoteGridBundle bundle{
            read_grid_file(dir / bundle_files::kFrame),
            read_grid_file(dir / bundle_files::kOnset),
            read_grid_file(dir / bundle_files::kOffset),
            read_grid_file(dir / bundle_files::kVelocity),
        };
        std::vector<NoteEvent> notes = decode_notes(bundle, args.thresholds);

        std::vector<PedalEvent> pedals;
        const bool any_pedal_file = fs::exists(dir / bundle_files::kPedalFrame) ||
                                    fs::exists(dir / bundle_files::kPedalOnset) ||
                                    fs::exists(dir / bundle_files::kPedalOffset);
        if (any_pedal_file) {
            for (const char* name : {bundle_files::kPedalFrame, bundle_files::kPedalOnset,
                                     bundle_files::kPedalOffset}) {
                if (!fs::exists(dir / name)) {
                    throw std::runtime_error("pedal bundle in " + dir.string() +
                                             " is missing: " + std::string(name));
                }
            }
            const PedalGridBundle pedal_bundle{
                read_grid_file(dir / bundle_files::kPedalFrame),
                read_grid_file(dir / bundle_files::kPedalOnset),
                read_grid_file(dir / bundle_files::kPedalOffset),
            };
            pedals = decode_pedals(pedal_bundle, args.thresholds);
        }

        const double duration = bundle.frame.grid().clip_end_time();
        const NoteSequence seq =
            make_note_sequence(std::move(notes), std::move(pedals), duration);
        write_file(args.out_midi,
                   write_midi(seq, args.ticks_per_quarter, args.tempo_bpm));
        out << "decoded " << seq.notes.size() << " notes, " << seq.pedals.size()
            << " pedal spans -> " << args.out_midi << '\n';
    });
}

int run_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        args.config.validate();
        const NoteSequence ref = parse_midi_file(args.ref_path);
        const NoteSequence est = parse_midi_file(args.est_path);

        const double duration = std::max(ref.duration_seconds, est.duration_seconds);
        const TimeGrid grid(args.hop_seconds, frames_for_duration(duration, args.hop_seconds),
                            kNumPianoKeys);
        const EvalResult frame =
            frame_metrics(rasterize_frame_roll(ref, grid), rasterize_frame_roll(est, grid));

        MatchConfig onset_only = args.config;
        onset_only.use_offset = false;
        onset_only.use_velocity = false;
        MatchConfig with_offset = onset_only;
        with_offset.use_offset = true;
        MatchConfig with_velocity = with_offset;
        with_velocity.use_velocity = true;

        struct Row {
            std::string label;
            EvalResult result;
        };
        std::vector<Row> rows;
        rows.push_back({"Frame", frame});
        rows.push_back({"Note", match_notes(ref.notes, est.notes, onset_only)});
        rows.push_back({"Note w/ offset", match_notes(ref.notes, est.notes, with_offset)});
        rows.push_back(
            {"Note w/ offset & velocity", match_notes(ref.notes, est.notes, with_velocity)});
        if (!ref.pedals.empty() || !est.pedals.empty()) {
            rows.push_back({"Pedal event", match_pedals(ref.pedals, est.pedals, onset_only)});
            rows.push_back(
                {"Pedal event w/ offset", match_pedals(ref.pedals, est.pedals, with_offset)});
        }

        out << "                              P (%)   R (%)  F1 (%)\n";
        for (const Row& row : rows) print_metric_row(out, row.label, row.result);

        if (!args.csv_path.empty()) {
            std::ofstream csv(args.csv_path, std::ios::trunc);
            if (!csv) {
                throw std::runtime_error("cannot open " + args.csv_path + " for writing");
            }
            csv << "group,precision,recall,f1\n";
            char buf[160];
            for (const Row& row : rows) {
                std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f\n", row.label.c_str(),
                              row.result.precision, row.result.recall, row.result.f1);
                csv << buf;
            }
        }

        if (!args.sweep_onset.empty()) {
            out << "onset tolerance sweep:\n";
            print_sweep(out, tolerance_sweep(ref.notes, est.notes, args.sweep_onset,
                                             SweepMode::Onset));
        }
        if (!args.sweep_offset.empty()) {
            out << "offset tolerance sweep:\n";
            print_sweep(out, tolerance_sweep(ref.notes, est.notes, args.sweep_offset,
                                             SweepMode::Offset));
        }
    });
}

int run_roundtrip(const RoundtripArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (args.sharpness < 1) {
            throw std::invalid_argument("sharpness must be >= 1");
        }
        args.thresholds.validate();
        const NoteSequence seq = parse_midi_file(args.midi_path);
        const RoundtripStats stats =
            roundtrip_stats(seq, args.hop_seconds, args.sharpness, args.noise_half_width,
                            args.seed, args.thresholds);

        char buf[256];
        out << "reference notes: " << stats.reference_notes
            << ", decoded notes: " << stats.decoded_notes << '\n';
        std::snprintf(buf, sizeof buf,
                      "max onset error: %.6f ms\nmean onset error: %.6f ms\n"
                      "max offset error: %.6f ms\nmax velocity error: %d\n",
                      stats.max_onset_error * 1e3, stats.mean_onset_error * 1e3,
                      stats.max_offset_error * 1e3, stats.max_velocity_error);
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "Note F1: %.2f%%  Note w/ offset F1: %.2f%%  "
                      "Note w/ offset & velocity F1: %.2f%%\n",
                      stats.note_f1 * 100.0, stats.note_offset_f1 * 100.0,
                      stats.note_offset_velocity_f1 * 100.0);
        out << buf;
        if (stats.has_pedals) {
            out << "reference pedals: " << stats.reference_pedals
                << ", decoded pedals: " << stats.decoded_pedals << '\n';
            std::snprintf(buf, sizeof buf,
                          "Pedal event F1: %.2f%%  Pedal event w/ offset F1: %.2f%%\n"
                          "max pedal onset error: %.3f ms, max pedal offset error: %.6f ms\n",
                          stats.pedal_f1 * 100.0, stats.pedal_offset_f1 * 100.0,
                          stats.pedal_max_onset_error * 1e3,
                          stats.pedal_max_offset_error * 1e3);
            out << buf;
        }

        if (args.robustness_trials > 0) {
            const RobustnessReport report =
                robustness_report(args.sharpness, args.hop_seconds, args.noise_half_width,
                                  args.robustness_trials, args.seed);
            out << "robustness simulation (" << args.robustness_trials << " trials):\n"
                << summarize_robustness(report);
            if (!args.robustness_csv.empty()) {
                std::ofstream csv(args.robustness_csv, std::ios::trunc);
                if (!csv) {
                    throw std::runtime_error("cannot open " + args.robustness_csv +
                                             " for writing");
                }
                write_robustness_csv(csv, report);
            }
        }
    });
}

int run_perturb(const PerturbArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const NoteSequence seq = parse_midi_file(args.midi_in);
        const NoteSequence shifted =
            perturb_events(seq, NoiseConfig{args.noise_half_width, args.seed});
        write_file(args.midi_out,
                   write_midi(shifted, args.ticks_per_quarter, args.tempo_bpm));
        out << "perturbed " << shifted.notes.size() << " notes, " << shifted.pedals.size()
            << " pedal spans -> " << args.midi_out << '\n';
    });
}

int run_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const NoteSequence ref = parse_midi_file(args.ref_path);
        const NoteSequence est = parse_midi_file(args.est_path);
        const auto rows = tolerance_sweep(ref.notes, est.notes, args.tolerances, args.mode);
        print_sweep(out, rows);
        if (!args.csv_path.empty()) {
            std::ofstream csv(args.csv_path, std::ios::trunc);
            if (!csv) {
                throw std::runtime_error("cannot open " + args.csv_path + " for writing");
            }
            print_sweep(csv, rows);
        }
    });
}

} // namespace pianokit::cli
