#pragma once

#include <utility>
#include <vector>

#include "pianokit/core.hpp"

namespace pianokit {

// Tolerances for event matching, defaulting to the common evaluation
// protocol: 50 ms onsets, offset window max(50 ms, 0.2 x reference duration),
// velocity tolerance 0.1 after normalization to [0, 1].
struct MatchConfig {
    double onset_tolerance_seconds = 0.05;
    bool use_offset = false;
    double offset_tolerance_seconds = 0.05;
    double offset_ratio = 0.2;
    bool use_velocity = false;
    double velocity_tolerance = 0.1;

    void validate() const;
};

struct EvalResult {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::vector<std::pair<int, int>> matched_pairs; // (reference index, estimate index)
};

// Note matching. A pair (r, e) is admissible when the pitches are equal, the
// onsets differ by at most the onset tolerance, offsets (when enabled) differ
// by at most max(offset tolerance, offset_ratio x reference duration), and
// velocities (when enabled) satisfy |v_r - s*v_e| / 127 <= tolerance with s
// the least-squares scale fitted over the onset/offset-admissible pairs. The
// final matching maximizes the number of one-to-one pairs; precision is
// matches/|est|, recall matches/|ref|. Two empty lists count as perfect
// agreement (P = R = F1 = 1).
EvalResult match_notes(const std::vector<NoteEvent>& ref, const std::vector<NoteEvent>& est,
                       const MatchConfig& config);

// Pedal matching: the same rules without the pitch and velocity clauses.
EvalResult match_pedals(const std::vector<PedalEvent>& ref, const std::vector<PedalEvent>& est,
                        const MatchConfig& config);

// Cell-wise precision/recall/F1 over two equal-shape binary rolls (values
// > 0.5 count as positive).
EvalResult frame_metrics(const RegressionGrid& ref_roll, const RegressionGrid& est_roll);

enum class SweepMode {
    Onset,  // vary the onset tolerance, offsets and velocity off
    Offset, // onset tolerance fixed at 50 ms, vary the offset tolerance, ratio 0.2
};

// Evaluates one (ref, est) pair across a sorted list of tolerances.
std::vector<std::pair<double, EvalResult>> tolerance_sweep(const std::vector<NoteEvent>& ref,
                                                           const std::vector<NoteEvent>& est,
                                                           const std::vector<double>& tolerances,
                                                           SweepMode mode);

} // namespace pianokit
