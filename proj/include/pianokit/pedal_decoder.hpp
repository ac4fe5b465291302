#pragma once

#include <vector>

#include "pianokit/core.hpp"

namespace pianokit {

// The three single-channel prediction grids a pedal decode consumes.
struct PedalGridBundle {
    RegressionGrid frame;      // frame-wise pedal presence
    RegressionGrid onset_reg;  // decoded input, unused at inference
    RegressionGrid offset_reg; // offset regression output

    void validate() const;
};

// Scans the frame series with an explicit open/closed state machine:
//
//   - closed: frame t (t >= 1) opens a pedal at its centre when the frame
//     value exceeds the pedal-onset threshold and rises from frame t-1
//   - open: the span closes at a refined thresholded maximum of the offset
//     column, or at the centre of the first frame whose presence drops under
//     the pedal-frame threshold, whichever comes first
//   - open at clip end: closes at the last frame centre
//
// Onsets are frame-resolution by construction; only offsets are refined.
// Output spans are sorted and never overlap.
std::vector<PedalEvent> decode_pedals(const PedalGridBundle& bundle,
                                      const Thresholds& thresholds);

} // namespace pianokit
