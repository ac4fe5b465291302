#pragma once

#include <vector>

#include "pianokit/core.hpp"

namespace pianokit {

// The four prediction grids a note decode consumes. All share one TimeGrid
// with 88 keys.
struct NoteGridBundle {
    RegressionGrid frame;      // frame-wise note presence
    RegressionGrid onset_reg;  // onset regression output
    RegressionGrid offset_reg; // offset regression output
    RegressionGrid velocity;   // velocity output, [0, 1]

    void validate() const;
};

// Converts prediction grids into note events, per key:
//
//   1. onsets are thresholded local maxima of the onset column, refined to
//      sub-frame times; velocity is the velocity grid at the argmax frame,
//      scaled by 128 and clamped to [1, 127]
//   2. each onset closes at the earliest later time where the offset column
//      has a refined thresholded maximum or the frame column falls under the
//      frame threshold (at that frame's centre)
//   3. a following onset on the same key truncates the note there
//   4. notes still open at the clip end close at the last frame centre
//
// Output is sorted by (onset, pitch); same-pitch notes never overlap.
std::vector<NoteEvent> decode_notes(const NoteGridBundle& bundle, const Thresholds& thresholds);

} // namespace pianokit
