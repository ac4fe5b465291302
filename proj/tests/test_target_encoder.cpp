#include <doctest.h>

#include <cmath>
#include <vector>

#include "pianokit/peak_refine.hpp"
#include "pianokit/rng.hpp"
#include "pianokit/target_encoder.hpp"

using namespace pianokit;

namespace {

// Brute-force oracle: per frame, the distance to the nearest event decides
// the value directly.
std::vector<double> nearest_event_scan(const std::vector<double>& events, const TimeGrid& grid,
                                       int sharpness) {
    std::vector<double> column(static_cast<size_t>(grid.num_frames), 0.0);
    for (int i = 0; i < grid.num_frames; ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (double t : events) {
            nearest = std::min(nearest, std::abs(i * grid.hop_seconds - t));
        }
        if (!events.empty()) {
            column[i] = std::max(0.0, 1.0 - nearest / (sharpness * grid.hop_seconds));
        }
    }
    return column;
}

} // namespace

TEST_SUITE("target_encoder") {

TEST_CASE("event on a frame centre gives the 1.0/0.8/0.6/0.4/0.2 profile") {
    TimeGrid grid(0.01, 200, 1);
    const std::vector<double> column = encode_regression_track({1.0}, grid, 5);
    CHECK(column[100] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(column[101] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(column[99] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(column[102] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(column[103] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(column[104] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(column[105] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(column[106] == 0.0);
}

TEST_CASE("event on a frame boundary splits 0.9/0.9") {
    TimeGrid grid(0.01, 200, 1);
    const std::vector<double> column = encode_regression_track({1.005}, grid, 5);
    CHECK(column[100] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(column[101] == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("a frame 30 ms from the event gets 0.4 at J=5") {
    TimeGrid grid(0.01, 200, 1);
    const std::vector<double> column = encode_regression_track({1.0}, grid, 5);
    CHECK(column[103] == doctest::Approx(1.0 - 0.03 / 0.05).epsilon(1e-12));
}

TEST_CASE("overlapping triangles take the elementwise maximum") {
    TimeGrid grid(0.01, 300, 1);
    SplitMix64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> events;
        const int count = rng.next_int(1, 5);
        for (int i = 0; i < count; ++i) events.push_back(rng.next_double(0.3, 2.6));
        // Include the spec's two-events-three-frames-apart shape.
        if (trial == 0) events = {1.0, 1.03};
        const int sharpness = rng.next_int(2, 8);
        const std::vector<double> encoded = encode_regression_track(events, grid, sharpness);
        const std::vector<double> oracle = nearest_event_scan(events, grid, sharpness);
        for (int i = 0; i < grid.num_frames; ++i) {
            CHECK(encoded[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("empty event list encodes to zeros") {
    TimeGrid grid(0.01, 50, 1);
    const std::vector<double> column = encode_regression_track({}, grid, 5);
    for (double v : column) CHECK(v == 0.0);
}

TEST_CASE("single note fills the expected cells") {
    TimeGrid grid(0.01, 200, kNumPianoKeys);
    const NoteSequence seq =
        make_note_sequence({NoteEvent{60, 1.000, 1.500, 100}}, {}, 1.99);
    const EncodedNoteTargets targets = encode_note_targets(seq, grid, 5);
    const int k = 39; // pitch 60 -> key 39

    CHECK(targets.onset_reg.at(100, k) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(targets.onset_reg.at(100, k - 1) == 0.0);
    CHECK(targets.offset_reg.at(150, k) == doctest::Approx(1.0).epsilon(1e-12));

    for (int t = 100; t <= 149; ++t) CHECK(targets.frame_roll.at(t, k) == 1.0);
    CHECK(targets.frame_roll.at(99, k) == 0.0);
    CHECK(targets.frame_roll.at(150, k) == 0.0); // [onset, offset) is half-open

    CHECK(targets.onset_mask.at(100, k) == 1.0);
    CHECK(targets.onset_mask.at(101, k) == 0.0);
    CHECK(targets.velocity_roll.at(100, k) == doctest::Approx(100.0 / 127.0).epsilon(1e-12));
    CHECK(targets.velocity_roll.at(101, k) == 0.0);
}

TEST_CASE("empty sequence encodes to all-zero grids") {
    TimeGrid grid(0.01, 100, kNumPianoKeys);
    const EncodedNoteTargets targets = encode_note_targets(NoteSequence{}, grid, 5);
    for (double v : targets.onset_reg.values()) CHECK(v == 0.0);
    for (double v : targets.frame_roll.values()) CHECK(v == 0.0);
    for (double v : targets.velocity_roll.values()) CHECK(v == 0.0);
}

TEST_CASE("a 4 ms note still occupies exactly one frame") {
    TimeGrid grid(0.01, 100, kNumPianoKeys);
    const NoteSequence seq = make_note_sequence({NoteEvent{60, 0.502, 0.506, 80}}, {});
    const EncodedNoteTargets targets = encode_note_targets(seq, grid, 5);
    int active = 0;
    for (int t = 0; t < grid.num_frames; ++t) {
        active += targets.frame_roll.at(t, 39) == 1.0;
    }
    CHECK(active == 1);
    CHECK(targets.frame_roll.at(50, 39) == 1.0); // nearest frame of the onset
}

TEST_CASE("pedal encoding matches the note rules on one channel") {
    TimeGrid grid(0.01, 300, 1);

    SUBCASE("one span [1,2] fills frames 100..199") {
        const NoteSequence seq = make_note_sequence({}, {PedalEvent{1.0, 2.0}}, 2.99);
        const EncodedPedalTargets targets = encode_pedal_targets(seq, grid, 5);
        for (int t = 100; t <= 199; ++t) CHECK(targets.frame_roll.at(t, 0) == 1.0);
        CHECK(targets.frame_roll.at(99, 0) == 0.0);
        CHECK(targets.frame_roll.at(200, 0) == 0.0);
        CHECK(targets.onset_reg.at(100, 0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(targets.offset_reg.at(200, 0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("no pedals give zero grids") {
        const EncodedPedalTargets targets = encode_pedal_targets(NoteSequence{}, grid, 5);
        for (double v : targets.frame_roll.values()) CHECK(v == 0.0);
        for (double v : targets.onset_reg.values()) CHECK(v == 0.0);
    }
    SUBCASE("onset at 1.004 peaks at 0.92 on frame 100") {
        const NoteSequence seq = make_note_sequence({}, {PedalEvent{1.004, 2.0}}, 2.99);
        const EncodedPedalTargets targets = encode_pedal_targets(seq, grid, 5);
        CHECK(targets.onset_reg.at(100, 0) == doctest::Approx(0.92).epsilon(1e-12));
    }
    SUBCASE("overlapping spans are rejected") {
        NoteSequence seq;
        seq.pedals = {PedalEvent{1.0, 2.0}, PedalEvent{1.5, 2.5}};
        CHECK_THROWS_AS(encode_pedal_targets(seq, grid, 5), std::invalid_argument);
    }
}

TEST_CASE("keys encode independently") {
    TimeGrid grid(0.01, 300, kNumPianoKeys);
    const std::vector<NoteEvent> notes = {NoteEvent{60, 0.50, 1.00, 90},
                                          NoteEvent{64, 0.71, 1.30, 60},
                                          NoteEvent{60, 1.22, 1.80, 40}};
    const EncodedNoteTargets all = encode_note_targets(make_note_sequence(notes, {}), grid, 5);
    for (int pitch : {60, 64}) {
        std::vector<NoteEvent> only;
        for (const NoteEvent& n : notes) {
            if (n.pitch == pitch) only.push_back(n);
        }
        const EncodedNoteTargets single =
            encode_note_targets(make_note_sequence(only, {}), grid, 5);
        const int k = pitch - kMinMidiPitch;
        for (int t = 0; t < grid.num_frames; ++t) {
            CHECK(all.onset_reg.at(t, k) == single.onset_reg.at(t, k));
            CHECK(all.offset_reg.at(t, k) == single.offset_reg.at(t, k));
            CHECK(all.frame_roll.at(t, k) == single.frame_roll.at(t, k));
            CHECK(all.velocity_roll.at(t, k) == single.velocity_roll.at(t, k));
        }
    }
}

TEST_CASE("shifting events by whole frames shifts the encoding") {
    TimeGrid grid(0.01, 400, 1);
    const std::vector<double> events = {0.5123, 0.9871, 1.5};
    const int shift_frames = 7;
    std::vector<double> shifted;
    for (double t : events) shifted.push_back(t + shift_frames * grid.hop_seconds);
    const std::vector<double> base = encode_regression_track(events, grid, 5);
    const std::vector<double> moved = encode_regression_track(shifted, grid, 5);
    for (int i = 0; i + shift_frames < grid.num_frames; ++i) {
        CHECK(moved[i + shift_frames] == doctest::Approx(base[i]).epsilon(1e-9));
    }
}

TEST_CASE("events beyond the clip end are clipped, not dropped") {
    TimeGrid grid(0.01, 100, 1); // clip ends at 0.99
    const std::vector<double> column = encode_regression_track({5.0}, grid, 5);
    CHECK(column[99] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("encoder rejects bad inputs") {
    TimeGrid grid(0.01, 100, 1);
    CHECK_THROWS_AS(encode_regression_track({0.5}, grid, 0), std::invalid_argument);
    CHECK_THROWS_AS(encode_note_targets(NoteSequence{}, grid, 5), std::invalid_argument);
    TimeGrid wide(0.01, 100, kNumPianoKeys);
    CHECK_THROWS_AS(encode_pedal_targets(NoteSequence{}, wide, 5), std::invalid_argument);
}

TEST_CASE("isolated encoded events invert exactly through refinement") {
    // The encoder and the peak refiner are algebraic inverses for isolated
    // events; this is the property the whole pipeline leans on.
    TimeGrid grid(0.01, 1001, 1);
    SplitMix64 rng(404);
    for (int trial = 0; trial < 100; ++trial) {
        const double t0 = rng.next_double(0.1, 9.9);
        const std::vector<double> column = encode_regression_track({t0}, grid, 5);
        const std::vector<RefinedPeak> peaks = detect_and_refine(column, 0.3, grid);
        REQUIRE(peaks.size() == 1);
        CHECK(std::abs(peaks[0].refined_time_seconds - t0) < 1e-9);
    }
}

} // TEST_SUITE
