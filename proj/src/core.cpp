#include "pianokit/core.hpp"

#include <algorithm>
#include <cmath>

namespace pianokit {

TimeGrid::TimeGrid(double hop, int frames, int keys)
    : hop_seconds(hop), num_frames(frames), num_keys(keys) {
    if (!(hop > 0.0) || !std::isfinite(hop)) {
        throw std::invalid_argument("TimeGrid: hop_seconds must be positive, got " +
                                    std::to_string(hop));
    }
    if (frames < 1) {
        throw std::invalid_argument("TimeGrid: num_frames must be >= 1, got " +
                                    std::to_string(frames));
    }
    if (keys < 1) {
        throw std::invalid_argument("TimeGrid: num_keys must be >= 1, got " +
                                    std::to_string(keys));
    }
}

double TimeGrid::frame_center_time(int frame) const {
    if (frame < 0 || frame >= num_frames) {
        throw std::out_of_range("frame index " + std::to_string(frame) +
                                " outside [0, " + std::to_string(num_frames) + ")");
    }
    return frame * hop_seconds;
}

int TimeGrid::nearest_frame(double t) const {
    if (!(t >= 0.0)) {
        throw std::invalid_argument("nearest_frame: t must be >= 0, got " +
                                    std::to_string(t));
    }
    int lo = static_cast<int>(std::floor(t / hop_seconds));
    lo = std::clamp(lo, 0, num_frames - 1);
    if (lo == num_frames - 1) return lo;
    // Compare actual distances rather than trusting the division. Ties go to
    // the smaller index; the tolerance keeps mathematically exact ties (like
    // t = 3.5 * hop) from being flipped by rounding noise.
    const double d_lo = t - lo * hop_seconds;
    const double d_hi = (lo + 1) * hop_seconds - t;
    return d_hi < d_lo - 1e-9 * hop_seconds ? lo + 1 : lo;
}

void validate_note(const NoteEvent& note) {
    if (note.pitch < kMinMidiPitch || note.pitch > kMaxMidiPitch) {
        throw std::invalid_argument("note pitch " + std::to_string(note.pitch) +
                                    " outside piano range [" + std::to_string(kMinMidiPitch) +
                                    ", " + std::to_string(kMaxMidiPitch) + "]");
    }
    if (note.velocity < 1 || note.velocity > 127) {
        throw std::invalid_argument("note velocity " + std::to_string(note.velocity) +
                                    " outside [1, 127]");
    }
    if (!(note.onset_seconds >= 0.0) || !(note.onset_seconds < note.offset_seconds)) {
        throw std::invalid_argument("note times must satisfy 0 <= onset < offset, got [" +
                                    std::to_string(note.onset_seconds) + ", " +
                                    std::to_string(note.offset_seconds) + ")");
    }
}

void validate_pedal(const PedalEvent& pedal) {
    if (!(pedal.onset_seconds >= 0.0) || !(pedal.onset_seconds < pedal.offset_seconds)) {
        throw std::invalid_argument("pedal times must satisfy 0 <= onset < offset, got [" +
                                    std::to_string(pedal.onset_seconds) + ", " +
                                    std::to_string(pedal.offset_seconds) + ")");
    }
}

RegressionGrid::RegressionGrid(TimeGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    const size_t expected =
        static_cast<size_t>(grid_.num_frames) * static_cast<size_t>(grid_.num_keys);
    if (values_.size() != expected) {
        throw std::invalid_argument("RegressionGrid: expected " + std::to_string(expected) +
                                    " values, got " + std::to_string(values_.size()));
    }
    for (size_t i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (std::isnan(v) || v < 0.0 || v > 1.0) {
            throw std::invalid_argument("RegressionGrid: value " + std::to_string(v) +
                                        " at flat index " + std::to_string(i) +
                                        " outside [0, 1]");
        }
    }
}

RegressionGrid RegressionGrid::zeros(const TimeGrid& grid) {
    return RegressionGrid(
        grid, std::vector<double>(
                  static_cast<size_t>(grid.num_frames) * static_cast<size_t>(grid.num_keys),
                  0.0));
}

std::vector<double> RegressionGrid::column(int key) const {
    if (key < 0 || key >= grid_.num_keys) {
        throw std::out_of_range("key index " + std::to_string(key) + " outside [0, " +
                                std::to_string(grid_.num_keys) + ")");
    }
    std::vector<double> out(static_cast<size_t>(grid_.num_frames));
    for (int t = 0; t < grid_.num_frames; ++t) {
        out[t] = at(t, key);
    }
    return out;
}

void Thresholds::validate() const {
    auto check = [](double v, const char* name) {
        if (!(v > 0.0) || !(v < 1.0)) {
            throw std::invalid_argument(std::string("threshold ") + name + " = " +
                                        std::to_string(v) + " outside (0, 1)");
        }
    };
    check(onset, "onset");
    check(offset, "offset");
    check(frame, "frame");
    check(pedal_onset, "pedal_onset");
    check(pedal_offset, "pedal_offset");
    check(pedal_frame, "pedal_frame");
}

} // namespace pianokit
