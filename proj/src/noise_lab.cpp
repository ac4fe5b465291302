#include "pianokit/noise_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "pianokit/peak_refine.hpp"
#include "pianokit/rng.hpp"

namespace pianokit {
namespace {

constexpr double kMinDuration = 0.001; // floor for degenerate perturbed events

double uniform_shift(SplitMix64& rng, double half_width) {
    return rng.next_double(-half_width, half_width);
}

} // namespace

NoteSequence perturb_events(const NoteSequence& seq, const NoiseConfig& config) {
    if (config.half_width_seconds < 0.0) {
        throw std::invalid_argument("noise half-width must be >= 0");
    }
    SplitMix64 rng(config.seed);
    const double a = config.half_width_seconds;

    std::vector<NoteEvent> notes;
    notes.reserve(seq.notes.size());
    for (const NoteEvent& note : seq.notes) {
        double onset = std::max(0.0, note.onset_seconds + uniform_shift(rng, a));
        double offset = note.offset_seconds + uniform_shift(rng, a);
        if (offset <= onset) offset = onset + kMinDuration;
        notes.push_back(NoteEvent{note.pitch, onset, offset, note.velocity});
    }

    std::vector<PedalEvent> pedals;
    pedals.reserve(seq.pedals.size());
    for (const PedalEvent& pedal : seq.pedals) {
        double onset = std::max(0.0, pedal.onset_seconds + uniform_shift(rng, a));
        double offset = pedal.offset_seconds + uniform_shift(rng, a);
        if (offset <= onset) offset = onset + kMinDuration;
        pedals.push_back(PedalEvent{onset, offset});
    }
    // Shifts can make spans collide; truncate at the next onset and drop any
    // span that vanishes.
    std::sort(pedals.begin(), pedals.end(),
              [](const PedalEvent& x, const PedalEvent& y) {
                  return x.onset_seconds < y.onset_seconds;
              });
    std::vector<PedalEvent> fixed;
    for (const PedalEvent& pedal : pedals) {
        if (!fixed.empty() && fixed.back().offset_seconds > pedal.onset_seconds) {
            fixed.back().offset_seconds = pedal.onset_seconds;
            if (fixed.back().offset_seconds <= fixed.back().onset_seconds) fixed.pop_back();
        }
        fixed.push_back(pedal);
    }

    return make_note_sequence(std::move(notes), std::move(fixed), seq.duration_seconds);
}

TargetShape TargetShape::triangular(int sharpness, double hop_seconds) {
    if (sharpness < 1 || !(hop_seconds > 0.0)) {
        throw std::invalid_argument("triangular shape needs sharpness >= 1 and hop > 0");
    }
    return TargetShape{Kind::Triangular, hop_seconds, sharpness, 0};
}

TargetShape TargetShape::rectangular(int width_frames, double hop_seconds) {
    if (width_frames < 1 || !(hop_seconds > 0.0)) {
        throw std::invalid_argument("rectangular shape needs width >= 1 and hop > 0");
    }
    return TargetShape{Kind::Rectangular, hop_seconds, 0, width_frames};
}

double TargetShape::support_half_width() const {
    return kind == Kind::Triangular ? sharpness * hop_seconds
                                    : 0.5 * width_frames * hop_seconds;
}

double TargetShape::value(double t) const {
    const double half = support_half_width();
    if (kind == Kind::Triangular) {
        return std::max(0.0, 1.0 - std::abs(t) / half);
    }
    return std::abs(t) <= half ? 1.0 : 0.0;
}

namespace {

// Antiderivative of the unit triangle of half-width s, zero at -infinity.
double triangle_integral(double t, double s) {
    if (t <= -s) return 0.0;
    if (t <= 0.0) return 0.5 * s + t + t * t / (2.0 * s);
    if (t <= s) return 0.5 * s + t - t * t / (2.0 * s);
    return s;
}

double box_integral(double t, double half) {
    return std::clamp(t + half, 0.0, 2.0 * half);
}

} // namespace

double TargetShape::convolved_value(double half_width, double t) const {
    if (half_width < 0.0) {
        throw std::invalid_argument("noise half-width must be >= 0");
    }
    if (half_width == 0.0) return value(t);
    const double s = support_half_width();
    const double upper = t + half_width;
    const double lower = t - half_width;
    const double mass = kind == Kind::Triangular
                            ? triangle_integral(upper, s) - triangle_integral(lower, s)
                            : box_integral(upper, s) - box_integral(lower, s);
    return mass / (2.0 * half_width);
}

SampledCurve expected_target(const TargetShape& shape, double half_width, double resolution) {
    if (half_width < 0.0) {
        throw std::invalid_argument("noise half-width must be >= 0");
    }
    if (!(resolution > 0.0) || resolution > shape.hop_seconds / 10.0 + 1e-15) {
        throw std::invalid_argument("resolution must be positive and at most hop/10");
    }
    // The noise density is sampled on the same grid as the output so that the
    // discrete convolution preserves total mass exactly.
    const int noise_steps = static_cast<int>(std::llround(half_width / resolution));
    const double snapped_half = noise_steps * resolution;
    const double reach = shape.support_half_width() + snapped_half;
    const int half_count = static_cast<int>(std::ceil(reach / resolution)) + 1;

    SampledCurve curve;
    curve.resolution = resolution;
    curve.start_time = -half_count * resolution;
    curve.values.resize(2 * half_count + 1, 0.0);
    const double weight = 1.0 / (2 * noise_steps + 1);
    for (int n = -half_count; n <= half_count; ++n) {
        double sum = 0.0;
        for (int m = -noise_steps; m <= noise_steps; ++m) {
            sum += shape.value((n - m) * resolution);
        }
        curve.values[n + half_count] = weight * sum;
    }
    return curve;
}

RobustnessReport robustness_report(int sharpness, double hop_seconds, double half_width,
                                   int trials, std::uint64_t seed) {
    if (trials < 1) {
        throw std::invalid_argument("robustness_report needs at least 1 trial");
    }
    const TargetShape triangular = TargetShape::triangular(sharpness, hop_seconds);
    const TargetShape rectangular = TargetShape::rectangular(2, hop_seconds);

    const double margin =
        std::max(triangular.support_half_width(), rectangular.support_half_width()) +
        half_width + 2.0 * hop_seconds;
    const double clip = std::max(10.0, 4.0 * margin);
    const int num_frames = static_cast<int>(std::ceil(clip / hop_seconds)) + 1;
    const TimeGrid grid(hop_seconds, num_frames, 1);

    auto estimate_for = [&](const TargetShape& shape, double true_time) {
        std::vector<double> column(static_cast<size_t>(num_frames));
        double peak = 0.0;
        for (int i = 0; i < num_frames; ++i) {
            column[i] = shape.convolved_value(half_width, i * hop_seconds - true_time);
            peak = std::max(peak, column[i]);
        }
        double best = 0.0;
        double best_distance = std::numeric_limits<double>::infinity();
        for (const RefinedPeak& p : detect_and_refine(column, 0.5 * peak, grid)) {
            const double d = std::abs(p.refined_time_seconds - true_time);
            if (d < best_distance) {
                best_distance = d;
                best = p.refined_time_seconds;
            }
        }
        return best;
    };

    RobustnessReport report;
    report.trials.reserve(static_cast<size_t>(trials));
    double tri_sum = 0.0;
    double rect_sum = 0.0;
    for (int i = 0; i < trials; ++i) {
        SplitMix64 rng = SplitMix64::for_stream(seed, static_cast<std::uint64_t>(i));
        const double true_time = rng.next_double(margin, clip - margin);
        RobustnessTrial trial;
        trial.true_time = true_time;
        trial.triangular_estimate = estimate_for(triangular, true_time);
        trial.rectangular_estimate = estimate_for(rectangular, true_time);
        report.trials.push_back(trial);

        const double tri_err = std::abs(trial.triangular_estimate - true_time);
        const double rect_err = std::abs(trial.rectangular_estimate - true_time);
        tri_sum += tri_err;
        rect_sum += rect_err;
        report.triangular_max_abs_error = std::max(report.triangular_max_abs_error, tri_err);
        report.rectangular_max_abs_error = std::max(report.rectangular_max_abs_error, rect_err);
    }
    report.triangular_mean_abs_error = tri_sum / trials;
    report.rectangular_mean_abs_error = rect_sum / trials;
    return report;
}

void write_robustness_csv(std::ostream& out, const RobustnessReport& report) {
    out << "trial,kind,true_time,estimate,abs_error\n";
    char line[160];
    for (size_t i = 0; i < report.trials.size(); ++i) {
        const RobustnessTrial& t = report.trials[i];
        std::snprintf(line, sizeof line, "%zu,triangular,%.9g,%.9g,%.9g\n", i, t.true_time,
                      t.triangular_estimate, std::abs(t.triangular_estimate - t.true_time));
        out << line;
        std::snprintf(line, sizeof line, "%zu,rectangular,%.9g,%.9g,%.9g\n", i, t.true_time,
                      t.rectangular_estimate, std::abs(t.rectangular_estimate - t.true_time));
        out << line;
    }
}

std::string summarize_robustness(const RobustnessReport& report) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "triangular: mean |err| %.3f ms, max |err| %.3f ms\n"
                  "rectangular: mean |err| %.3f ms, max |err| %.3f ms\n",
                  report.triangular_mean_abs_error * 1e3, report.triangular_max_abs_error * 1e3,
                  report.rectangular_mean_abs_error * 1e3,
                  report.rectangular_max_abs_error * 1e3);
    return std::string(buf);
}

} // namespace pianokit
