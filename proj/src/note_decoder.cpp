#include "pianokit/note_decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pianokit/peak_refine.hpp"

namespace pianokit {

void NoteGridBundle::validate() const {
    if (frame.grid().num_keys != kNumPianoKeys) {
        throw std::invalid_argument("note bundle needs 88 keys, got " +
                                    std::to_string(frame.grid().num_keys));
    }
    if (onset_reg.grid() != frame.grid() || offset_reg.grid() != frame.grid() ||
        velocity.grid() != frame.grid()) {
        throw std::invalid_argument("note bundle grids have mismatched dimensions");
    }
}

std::vector<NoteEvent> decode_notes(const NoteGridBundle& bundle, const Thresholds& thresholds) {
    bundle.validate();
    thresholds.validate();
    const TimeGrid& grid = bundle.frame.grid();
    const int T = grid.num_frames;
    const double clip_end = grid.clip_end_time();
    constexpr double kInf = std::numeric_limits<double>::infinity();

    std::vector<NoteEvent> notes;
    for (int k = 0; k < kNumPianoKeys; ++k) {
        const std::vector<double> onset_col = bundle.onset_reg.column(k);
        const std::vector<double> offset_col = bundle.offset_reg.column(k);
        const std::vector<double> frame_col = bundle.frame.column(k);

        const std::vector<RefinedPeak> onsets =
            detect_and_refine(onset_col, thresholds.onset, grid);
        const std::vector<RefinedPeak> offsets =
            detect_and_refine(offset_col, thresholds.offset, grid);

        std::vector<double> offset_times;
        offset_times.reserve(offsets.size());
        for (const RefinedPeak& off : offsets) {
            offset_times.push_back(off.refined_time_seconds);
        }
        // next_drop[t]: first frame at or after t whose presence is under the
        // frame threshold; T when none.
        std::vector<int> next_drop(static_cast<size_t>(T) + 1);
        next_drop[T] = T;
        for (int t = T - 1; t >= 0; --t) {
            next_drop[t] = frame_col[t] < thresholds.frame ? t : next_drop[t + 1];
        }

        for (size_t j = 0; j < onsets.size(); ++j) {
            const double onset_time = onsets[j].refined_time_seconds;
            const int onset_frame = onsets[j].frame_index;

            const long velocity_raw =
                std::llround(bundle.velocity.at(onset_frame, k) * 128.0);
            const int velocity = static_cast<int>(std::clamp(velocity_raw, 1L, 127L));

            // Earliest offset-regression peak strictly after the onset.
            double peak_candidate = kInf;
            const auto it =
                std::upper_bound(offset_times.begin(), offset_times.end(), onset_time);
            if (it != offset_times.end()) peak_candidate = *it;

            // Earliest frame whose presence drops under the threshold, again
            // strictly after the onset.
            double frame_candidate = kInf;
            int drop = next_drop[onset_frame];
            while (drop < T && drop * grid.hop_seconds <= onset_time) {
                drop = next_drop[drop + 1];
            }
            if (drop < T) frame_candidate = drop * grid.hop_seconds;

            double offset_time = std::min(peak_candidate, frame_candidate);
            if (offset_time == kInf) offset_time = clip_end;
            if (j + 1 < onsets.size()) {
                offset_time = std::min(offset_time, onsets[j + 1].refined_time_seconds);
            }
            if (offset_time > onset_time) {
                notes.push_back(
                    NoteEvent{k + kMinMidiPitch, onset_time, offset_time, velocity});
            }
        }
    }

    std::sort(notes.begin(), notes.end(), [](const NoteEvent& a, const NoteEvent& b) {
        return std::tie(a.onset_seconds, a.pitch) < std::tie(b.onset_seconds, b.pitch);
    });
    return notes;
}

} // namespace pianokit
