#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "pianokit/cli.hpp"
#include "pianokit/grid_io.hpp"
#include "pianokit/midi_io.hpp"

using namespace pianokit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() /
                     ("pianokit_cli_test_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_midi_file(const fs::path& path, const NoteSequence& seq) {
    const std::vector<std::uint8_t> bytes = write_midi(seq);
    std::ofstream f(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

NoteSequence ten_second_sequence() {
    std::vector<NoteEvent> notes;
    for (int i = 0; i < 12; ++i) {
        notes.push_back(NoteEvent{48 + 3 * i, 0.3 + 0.75 * i, 0.3 + 0.75 * i + 0.4,
                                  30 + 7 * i});
    }
    return make_note_sequence(std::move(notes), {PedalEvent{1.0, 2.5}, PedalEvent{4.0, 5.5}},
                              10.0);
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("duration parsing is strict about units") {
    CHECK(cli::parse_duration("50ms") == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(cli::parse_duration("0.05s") == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(cli::parse_duration("10000us") == doctest::Approx(0.01).epsilon(1e-12));
    CHECK_THROWS_AS(cli::parse_duration("50"), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_duration("50m"), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_duration("fast"), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_duration("-5ms"), std::invalid_argument);
}

TEST_CASE("duration lists accept bare seconds and units") {
    const std::vector<double> values =
        cli::parse_duration_list("0.002,0.005,0.01,0.02,0.05,0.1");
    REQUIRE(values.size() == 6);
    CHECK(values[0] == doctest::Approx(0.002).epsilon(1e-12));
    CHECK(values[5] == doctest::Approx(0.1).epsilon(1e-12));
    const std::vector<double> with_units = cli::parse_duration_list("2ms,5ms,0.01s");
    CHECK(with_units[0] == doctest::Approx(0.002).epsilon(1e-12));
    CHECK(with_units[2] == doctest::Approx(0.01).epsilon(1e-12));
    CHECK_THROWS_AS(cli::parse_duration_list(""), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_duration_list("1,,2"), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_duration_list("1e"), std::invalid_argument);
}

TEST_CASE("encode writes a 1001-frame bundle for a 10-second file") {
    TempDir tmp;
    const fs::path midi = tmp.path / "in.mid";
    write_midi_file(midi, ten_second_sequence());

    cli::EncodeArgs args;
    args.midi_path = midi.string();
    args.out_dir = (tmp.path / "grids").string();
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cli::run_encode(args, out, err) == 0);
    CHECK(err.str().empty());
    CHECK(out.str().find("1001 frames x 88 keys") != std::string::npos);

    const RegressionGrid onset = read_grid_file(tmp.path / "grids" / bundle_files::kOnset);
    CHECK(onset.num_frames() == 1001);
    CHECK(onset.num_keys() == 88);
    const RegressionGrid pedal =
        read_grid_file(tmp.path / "grids" / bundle_files::kPedalFrame);
    CHECK(pedal.num_keys() == 1);
}

TEST_CASE("the sharpness override reaches the encoder") {
    TempDir tmp;
    const fs::path midi = tmp.path / "in.mid";
    // One note 4 ms off a frame centre: at J=2 its triangle spans 2J = 4 frames.
    write_midi_file(midi, make_note_sequence({NoteEvent{60, 0.304, 0.8, 90}}, {}, 2.0));
    cli::EncodeArgs args;
    args.midi_path = midi.string();
    args.out_dir = (tmp.path / "grids").string();
    args.sharpness = 2;
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cli::run_encode(args, out, err) == 0);
    const RegressionGrid onset = read_grid_file(tmp.path / "grids" / bundle_files::kOnset);
    int nonzero = 0;
    for (int t = 0; t < onset.num_frames(); ++t) {
        nonzero += onset.at(t, 39) > 0.0;
    }
    CHECK(nonzero == 4);
}

TEST_CASE("encode of an empty file yields zero grids and exit 0") {
    TempDir tmp;
    const fs::path midi = tmp.path / "empty.mid";
    write_midi_file(midi, NoteSequence{});
    cli::EncodeArgs args;
    args.midi_path = midi.string();
    args.out_dir = (tmp.path / "grids").string();
    std::ostringstream out;
    std::ostringstream err;
    CHECK(cli::run_encode(args, out, err) == 0);
    const RegressionGrid frame = read_grid_file(tmp.path / "grids" / bundle_files::kFrame);
    for (double v : frame.values()) CHECK(v == 0.0);
}

TEST_CASE("decode round-trips the encoded bundle to MIDI") {
    TempDir tmp;
    const NoteSequence seq = ten_second_sequence();
    const fs::path midi = tmp.path / "in.mid";
    write_midi_file(midi, seq);

    cli::EncodeArgs encode_args;
    encode_args.midi_path = midi.string();
    encode_args.out_dir = (tmp.path / "grids").string();
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cli::run_encode(encode_args, out, err) == 0);

    cli::DecodeArgs decode_args;
    decode_args.grid_dir = encode_args.out_dir;
    decode_args.out_midi = (tmp.path / "out.mid").string();
    REQUIRE(cli::run_decode(decode_args, out, err) == 0);

    std::ifstream f(decode_args.out_midi, std::ios::binary);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    const NoteSequence back = parse_midi(bytes);
    REQUIRE(back.notes.size() == seq.notes.size());
    REQUIRE(back.pedals.size() == seq.pedals.size());
    for (size_t i = 0; i < seq.notes.size(); ++i) {
        CHECK(back.notes[i].pitch == seq.notes[i].pitch);
        // One MIDI tick at 480 tpq / 120 BPM plus float grid rounding.
        CHECK(std::abs(back.notes[i].onset_seconds - seq.notes[i].onset_seconds) < 0.002);
        CHECK(std::abs(seq.notes[i].velocity - back.notes[i].velocity) <= 1);
    }
}

TEST_CASE("decode names missing bundle files") {
    TempDir tmp;
    fs::create_directories(tmp.path / "incomplete");
    cli::DecodeArgs args;
    args.grid_dir = (tmp.path / "incomplete").string();
    args.out_midi = (tmp.path / "out.mid").string();
    std::ostringstream out;
    std::ostringstream err;
    CHECK(cli::run_decode(args, out, err) == 1);
    CHECK(err.str().find("frame.hrtg") != std::string::npos);
    CHECK(err.str().find("onset.hrtg") != std::string::npos);
    CHECK(!fs::exists(args.out_midi));
}

TEST_CASE("high thresholds give an empty MIDI and exit 0") {
    TempDir tmp;
    const fs::path midi = tmp.path / "in.mid";
    // Onsets 4 ms off the frame centres: the encoded peaks top out at 0.92,
    // under the raised threshold.
    std::vector<NoteEvent> notes;
    for (int i = 0; i < 8; ++i) {
        notes.push_back(NoteEvent{50 + i, 0.304 + 0.75 * i, 0.604 + 0.75 * i, 80});
    }
    write_midi_file(midi, make_note_sequence(std::move(notes), {}, 10.0));
    cli::EncodeArgs encode_args;
    encode_args.midi_path = midi.string();
    encode_args.out_dir = (tmp.path / "grids").string();
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cli::run_encode(encode_args, out, err) == 0);

    cli::DecodeArgs decode_args;
    decode_args.grid_dir = encode_args.out_dir;
    decode_args.out_midi = (tmp.path / "out.mid").string();
    decode_args.thresholds.onset = 0.99;
    CHECK(cli::run_decode(decode_args, out, err) == 0);
    std::ifstream f(decode_args.out_midi, std::ios::binary);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    CHECK(parse_midi(bytes).notes.empty());
}

TEST_CASE("eval reports perfect scores for identical files") {
    TempDir tmp;
    const fs::path midi = tmp.path / "ref.mid";
    write_midi_file(midi, ten_second_sequence());

    cli::EvalArgs args;
    args.ref_path = midi.string();
    args.est_path = midi.string();
    args.csv_path = (tmp.path / "metrics.csv").string();
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cli::run_eval(args, out, err) == 0);
    const std::string text = out.str();
    CHECK(text.find("Frame") != std::string::npos);
    CHECK(text.find("Note w/ offset & velocity") != std::string::npos);
    CHECK(text.find("Pedal event") != std::string::npos);
    CHECK(text.find("100.00  100.00  100.00") != std::string::npos);
    CHECK(text.find("99.") == std::string::npos);

    std::ifstream csv(args.csv_path);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "group,precision,recall,f1");
    int rows = 0;
    while (std::getline(csv, line)) {
        CHECK(line.find("1.000000,1.000000,1.000000") != std::string::npos);
        ++rows;
    }
    CHECK(rows == 6);
}

TEST_CASE("eval counts one spurious extra note") {
    TempDir tmp;
    const NoteSequence ref = ten_second_sequence();
    NoteSequence est = ref;
    est.notes.push_back(NoteEvent{107, 9.0, 9.2, 50});
    est = make_note_sequence(est.notes, est.pedals, est.duration_seconds);
    write_midi_file(tmp.path / "ref.mid", ref);
    write_midi_file(tmp.path / "est.mid", est);

    cli::EvalArgs args;
    args.ref_path = (tmp.path / "ref.mid").string();
    args.est_path = (tmp.path / "est.mid").string();
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cli::run_eval(args, out, err) == 0);
    // N/(N+1) = 12/13 = 92.31% precision, recall 100%.
    CHECK(out.str().find("92.31  100.00") != std::string::npos);
}

TEST_CASE("eval runs the sweep grids from the flags") {
    TempDir tmp;
    const fs::path midi = tmp.path / "ref.mid";
    write_midi_file(midi, ten_second_sequence());
    cli::EvalArgs args;
    args.ref_path = midi.string();
    args.est_path = midi.string();
    args.sweep_onset = cli::parse_duration_list("0.002,0.005,0.01,0.02,0.05,0.1");
    args.sweep_offset = cli::parse_duration_list("0.01,0.02,0.05,0.1,0.2,0.5");
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cli::run_eval(args, out, err) == 0);
    CHECK(out.str().find("tolerance,precision,recall,f1") != std::string::npos);
    CHECK(out.str().find("0.002,1.000000,1.000000,1.000000") != std::string::npos);
    CHECK(out.str().find("0.5,1.000000,1.000000,1.000000") != std::string::npos);
}

TEST_CASE("roundtrip on a clean file is exact") {
    TempDir tmp;
    const fs::path midi = tmp.path / "in.mid";
    write_midi_file(midi, ten_second_sequence());
    cli::RoundtripArgs args;
    args.midi_path = midi.string();
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cli::run_roundtrip(args, out, err) == 0);
    const std::string text = out.str();
    CHECK(text.find("max onset error: 0.000000 ms") != std::string::npos);
    CHECK(text.find("Note F1: 100.00%") != std::string::npos);
    CHECK(text.find("Pedal event F1: 100.00%") != std::string::npos);
}

TEST_CASE("roundtrip with noise keeps F1 high and is seed-stable") {
    TempDir tmp;
    const fs::path midi = tmp.path / "in.mid";
    // Inter-onset gaps far above the noise so merges cannot happen.
    std::vector<NoteEvent> notes;
    for (int i = 0; i < 30; ++i) {
        notes.push_back(NoteEvent{50 + (i % 30), 0.3 + 0.31 * i, 0.3 + 0.31 * i + 0.12,
                                  40 + i});
    }
    write_midi_file(midi, make_note_sequence(std::move(notes), {}, 10.0));

    cli::RoundtripArgs args;
    args.midi_path = midi.string();
    args.noise_half_width = 0.05;
    args.seed = 21;
    std::ostringstream out_a;
    std::ostringstream out_b;
    std::ostringstream err;
    REQUIRE(cli::run_roundtrip(args, out_a, err) == 0);
    REQUIRE(cli::run_roundtrip(args, out_b, err) == 0);
    CHECK(out_a.str() == out_b.str());

    const NoteSequence original = parse_midi([&] {
        std::ifstream f(midi, std::ios::binary);
        return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(f)),
                                         std::istreambuf_iterator<char>());
    }());
    const cli::RoundtripStats stats =
        cli::roundtrip_stats(original, 0.01, 5, 0.05, 21, Thresholds{});
    CHECK(stats.note_f1 >= 0.95);
    CHECK(stats.max_onset_error <= 0.05 + 1e-6);
}

TEST_CASE("perturb writes a shifted MIDI file") {
    TempDir tmp;
    const fs::path midi = tmp.path / "in.mid";
    write_midi_file(midi, ten_second_sequence());
    cli::PerturbArgs args;
    args.midi_in = midi.string();
    args.midi_out = (tmp.path / "out.mid").string();
    args.noise_half_width = 0.03;
    args.seed = 5;
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cli::run_perturb(args, out, err) == 0);
    CHECK(fs::exists(args.midi_out));
}

TEST_CASE("missing input files exit nonzero with a message") {
    cli::EncodeArgs args;
    args.midi_path = "/nonexistent/input.mid";
    args.out_dir = "/tmp/pianokit_nowhere";
    std::ostringstream out;
    std::ostringstream err;
    CHECK(cli::run_encode(args, out, err) == 1);
    CHECK(!err.str().empty());
}

} // TEST_SUITE
