#include "pianokit/target_encoder.hpp"

#include <algorithm>
#include <cmath>

namespace pianokit {
namespace {

// Half-open interval [onset, offset) over frame centres, with a small
// relative tolerance so times that are mathematically on a centre are not
// pushed off it by floating-point noise.
constexpr double kFrameEps = 1e-6; // in frame units

int first_frame_at_or_after(double t, const TimeGrid& grid) {
    return std::max(0, static_cast<int>(std::ceil(t / grid.hop_seconds - kFrameEps)));
}

int last_frame_before(double t, const TimeGrid& grid) {
    return std::min(grid.num_frames - 1,
                    static_cast<int>(std::floor(t / grid.hop_seconds - kFrameEps)));
}

void check_sharpness(int sharpness) {
    if (sharpness < 1) {
        throw std::invalid_argument("sharpness must be >= 1, got " +
                                    std::to_string(sharpness));
    }
}

} // namespace

std::vector<double> encode_regression_track(const std::vector<double>& event_times,
                                            const TimeGrid& grid, int sharpness) {
    check_sharpness(sharpness);
    std::vector<double> column(static_cast<size_t>(grid.num_frames), 0.0);
    const double hop = grid.hop_seconds;
    const double half_width = sharpness * hop;
    for (double t : event_times) {
        const double clipped = std::clamp(t, 0.0, grid.clip_end_time());
        const int lo = std::max(0, static_cast<int>(std::ceil((clipped - half_width) / hop)));
        const int hi = std::min(grid.num_frames - 1,
                                static_cast<int>(std::floor((clipped + half_width) / hop)));
        for (int i = lo; i <= hi; ++i) {
            const double value = 1.0 - std::abs(i * hop - clipped) / half_width;
            if (value > column[i]) column[i] = value;
        }
    }
    return column;
}

RegressionGrid rasterize_frame_roll(const NoteSequence& seq, const TimeGrid& grid) {
    if (grid.num_keys != kNumPianoKeys) {
        throw std::invalid_argument("note frame roll needs an 88-key grid, got " +
                                    std::to_string(grid.num_keys) + " keys");
    }
    const int K = grid.num_keys;
    std::vector<double> roll(static_cast<size_t>(grid.num_frames) * K, 0.0);
    for (const NoteEvent& note : seq.notes) {
        validate_note(note);
        const int k = note.key_index();
        const double onset = std::clamp(note.onset_seconds, 0.0, grid.clip_end_time());
        const double offset = std::clamp(note.offset_seconds, 0.0, grid.clip_end_time());
        const int last = std::max(last_frame_before(offset, grid), 0);
        for (int t = first_frame_at_or_after(onset, grid); t <= last; ++t) {
            roll[static_cast<size_t>(t) * K + k] = 1.0;
        }
        roll[static_cast<size_t>(grid.nearest_frame(onset)) * K + k] = 1.0;
    }
    return RegressionGrid(grid, std::move(roll));
}

EncodedNoteTargets encode_note_targets(const NoteSequence& seq, const TimeGrid& grid,
                                       int sharpness) {
    check_sharpness(sharpness);
    if (grid.num_keys != kNumPianoKeys) {
        throw std::invalid_argument("note targets need an 88-key grid, got " +
                                    std::to_string(grid.num_keys) + " keys");
    }
    const int T = grid.num_frames;
    const int K = grid.num_keys;
    const size_t cells = static_cast<size_t>(T) * K;
    std::vector<double> onset_reg(cells, 0.0);
    std::vector<double> offset_reg(cells, 0.0);
    std::vector<double> frame_roll(cells, 0.0);
    std::vector<double> velocity_roll(cells, 0.0);
    std::vector<double> onset_mask(cells, 0.0);
    auto cell = [K](int t, int k) { return static_cast<size_t>(t) * K + k; };

    std::vector<std::vector<double>> onsets_per_key(K);
    std::vector<std::vector<double>> offsets_per_key(K);
    for (const NoteEvent& note : seq.notes) {
        validate_note(note);
        const int k = note.key_index();
        const double onset = std::clamp(note.onset_seconds, 0.0, grid.clip_end_time());
        const double offset = std::clamp(note.offset_seconds, 0.0, grid.clip_end_time());
        onsets_per_key[k].push_back(onset);
        offsets_per_key[k].push_back(offset);

        const int last = std::max(last_frame_before(offset, grid), 0);
        for (int t = first_frame_at_or_after(onset, grid); t <= last; ++t) {
            frame_roll[cell(t, k)] = 1.0;
        }
        const int onset_frame = grid.nearest_frame(onset);
        frame_roll[cell(onset_frame, k)] = 1.0; // sub-hop notes still occupy one frame
        onset_mask[cell(onset_frame, k)] = 1.0;
        velocity_roll[cell(onset_frame, k)] = note.velocity / 127.0;
    }

    for (int k = 0; k < K; ++k) {
        const std::vector<double> on = encode_regression_track(onsets_per_key[k], grid, sharpness);
        const std::vector<double> off =
            encode_regression_track(offsets_per_key[k], grid, sharpness);
        for (int t = 0; t < T; ++t) {
            onset_reg[cell(t, k)] = on[t];
            offset_reg[cell(t, k)] = off[t];
        }
    }

    return EncodedNoteTargets{
        RegressionGrid(grid, std::move(onset_reg)),
        RegressionGrid(grid, std::move(offset_reg)),
        RegressionGrid(grid, std::move(frame_roll)),
        RegressionGrid(grid, std::move(velocity_roll)),
        RegressionGrid(grid, std::move(onset_mask)),
    };
}

EncodedPedalTargets encode_pedal_targets(const NoteSequence& seq, const TimeGrid& grid,
                                         int sharpness) {
    check_sharpness(sharpness);
    if (grid.num_keys != 1) {
        throw std::invalid_argument("pedal targets need a single-channel grid, got " +
                                    std::to_string(grid.num_keys) + " keys");
    }
    const int T = grid.num_frames;
    std::vector<double> frame_roll(static_cast<size_t>(T), 0.0);
    std::vector<double> onsets;
    std::vector<double> offsets;
    const PedalEvent* previous = nullptr;
    for (const PedalEvent& pedal : seq.pedals) {
        validate_pedal(pedal);
        if (previous && pedal.onset_seconds < previous->offset_seconds) {
            throw std::invalid_argument("overlapping pedal spans near t = " +
                                        std::to_string(pedal.onset_seconds));
        }
        previous = &pedal;
        const double onset = std::clamp(pedal.onset_seconds, 0.0, grid.clip_end_time());
        const double offset = std::clamp(pedal.offset_seconds, 0.0, grid.clip_end_time());
        onsets.push_back(onset);
        offsets.push_back(offset);
        const int last = std::max(last_frame_before(offset, grid), 0);
        for (int t = first_frame_at_or_after(onset, grid); t <= last; ++t) {
            frame_roll[t] = 1.0;
        }
        frame_roll[grid.nearest_frame(onset)] = 1.0;
    }

    return EncodedPedalTargets{
        RegressionGrid(grid, encode_regression_track(onsets, grid, sharpness)),
        RegressionGrid(grid, encode_regression_track(offsets, grid, sharpness)),
        RegressionGrid(grid, std::move(frame_roll)),
    };
}

} // namespace pianokit
