#pragma once

#include <vector>

#include "pianokit/core.hpp"
#include "pianokit/midi_io.hpp"

namespace pianokit {

inline constexpr int kDefaultSharpness = 5; // J: an event spans 2J frames of target

// Training targets for the 88-key note grids. All five grids share one
// TimeGrid.
struct EncodedNoteTargets {
    RegressionGrid onset_reg;     // triangular onset targets
    RegressionGrid offset_reg;    // triangular offset targets
    RegressionGrid frame_roll;    // {0,1} note activity per frame
    RegressionGrid velocity_roll; // velocity/127 at each onset's nearest frame
    RegressionGrid onset_mask;    // {0,1}, the nearest frame of each onset
};

// Pedal targets on a single channel (K = 1).
struct EncodedPedalTargets {
    RegressionGrid onset_reg;
    RegressionGrid offset_reg;
    RegressionGrid frame_roll;
};

// One key's regression column. Frame i gets
//   max over events e of  max(0, 1 - |i*hop - t_e| / (sharpness*hop)),
// i.e. a unit-height triangle of half-width sharpness*hop per event, combined
// by elementwise maximum where triangles overlap. Event times are clipped to
// the grid range.
std::vector<double> encode_regression_track(const std::vector<double>& event_times,
                                            const TimeGrid& grid, int sharpness);

// Full note encoding. Per key: onset/offset regression columns from that
// key's events, frame roll 1 where the frame centre lies in [onset, offset)
// with the onset's nearest frame always set, onset mask at each onset's
// nearest frame, and velocity/127 where the mask is set. Requires
// grid.num_keys == 88.
EncodedNoteTargets encode_note_targets(const NoteSequence& seq, const TimeGrid& grid,
                                       int sharpness);

// Same rules applied to the pedal channel. Requires grid.num_keys == 1 and
// non-overlapping pedal spans.
EncodedPedalTargets encode_pedal_targets(const NoteSequence& seq, const TimeGrid& grid,
                                         int sharpness);

// The note frame roll alone, under the same [onset, offset) rule. Used to
// rasterize MIDI files for frame-level evaluation.
RegressionGrid rasterize_frame_roll(const NoteSequence& seq, const TimeGrid& grid);

} // namespace pianokit
