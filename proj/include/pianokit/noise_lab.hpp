#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pianokit/core.hpp"
#include "pianokit/midi_io.hpp"

namespace pianokit {

// Uniform label-shift noise: each onset and offset moves independently by a
// draw from Uniform(-half_width, +half_width).
struct NoiseConfig {
    double half_width_seconds = 0.05;
    std::uint64_t seed = 0;
};

// Deterministic given the seed. Shifted events are clamped to t >= 0; a note
// or pedal whose times cross gets a 1 ms floor duration. Pedal spans that end
// up overlapping are truncated at the next span's onset.
NoteSequence perturb_events(const NoteSequence& seq, const NoiseConfig& config);

// Idealized continuous-time event target centred at 0: either the unit
// triangle of half-width sharpness*hop, or the unit box of width
// width_frames*hop used by frame-classification systems.
struct TargetShape {
    enum class Kind { Triangular, Rectangular };

    Kind kind;
    double hop_seconds;
    int sharpness;    // triangular only
    int width_frames; // rectangular only

    static TargetShape triangular(int sharpness, double hop_seconds);
    static TargetShape rectangular(int width_frames, double hop_seconds);

    double support_half_width() const;
    double value(double t) const;

    // u(t): the shape convolved with the uniform density of the given
    // half-width, i.e. the value a well-trained predictor would output at
    // offset t from the true event when labels carry that noise. Closed form.
    double convolved_value(double half_width, double t) const;
};

struct SampledCurve {
    double start_time;  // time of values[0]
    double resolution;  // spacing between samples
    std::vector<double> values;

    double time_at(size_t i) const { return start_time + static_cast<double>(i) * resolution; }
};

// Numerically convolves the target shape with the uniform noise density and
// samples the result. With half_width 0 the curve is the shape itself.
// Requires resolution <= hop/10.
SampledCurve expected_target(const TargetShape& shape, double half_width, double resolution);

struct RobustnessTrial {
    double true_time;
    double triangular_estimate;
    double rectangular_estimate;
};

struct RobustnessReport {
    std::vector<RobustnessTrial> trials;
    double triangular_max_abs_error = 0.0;
    double triangular_mean_abs_error = 0.0;
    double rectangular_max_abs_error = 0.0;
    double rectangular_mean_abs_error = 0.0;
};

// Simulates decoding under label noise. Each trial draws a true event time,
// samples the noise-convolved triangular and rectangular (2-frame) targets on
// the frame grid, runs peak detection and refinement on both, and records the
// recovered times. Deterministic given the seed; trials use derived
// per-trial streams.
RobustnessReport robustness_report(int sharpness, double hop_seconds, double half_width,
                                   int trials, std::uint64_t seed);

// CSV rows: trial, kind, true_time, estimate, abs_error.
void write_robustness_csv(std::ostream& out, const RobustnessReport& report);

std::string summarize_robustness(const RobustnessReport& report);

} // namespace pianokit
