#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace pianokit {

// Error raised by the binary/CSV/MIDI readers. The message carries the byte
// offset or line number where the input went wrong.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kMinMidiPitch = 21;
inline constexpr int kMaxMidiPitch = 108;
inline constexpr int kNumPianoKeys = kMaxMidiPitch - kMinMidiPitch + 1; // 88

// Frame/time coordinate system. Frame i is centred at i * hop_seconds, so
// frame 0 sits at t = 0 and the clip ends at (num_frames - 1) * hop_seconds.
struct TimeGrid {
    double hop_seconds;
    int num_frames;
    int num_keys;

    TimeGrid(double hop, int frames, int keys);

    double frame_center_time(int frame) const;

    // Index of the frame centre closest to t, ties toward the smaller index,
    // clamped to [0, num_frames - 1].
    int nearest_frame(double t) const;

    double clip_end_time() const { return (num_frames - 1) * hop_seconds; }

    bool operator==(const TimeGrid&) const = default;
};

// One transcribed note: the <pitch, onset, offset, velocity> quadruple.
struct NoteEvent {
    int pitch;              // MIDI note number, 21..108
    double onset_seconds;
    double offset_seconds;  // > onset_seconds
    int velocity;           // 1..127

    int key_index() const { return pitch - kMinMidiPitch; }

    bool operator==(const NoteEvent&) const = default;
};

// One sustain-pedal span.
struct PedalEvent {
    double onset_seconds;
    double offset_seconds;

    bool operator==(const PedalEvent&) const = default;
};

// Throws std::invalid_argument on out-of-range pitch/velocity or a
// non-positive duration.
void validate_note(const NoteEvent& note);
void validate_pedal(const PedalEvent& pedal);

// A T x K matrix of values in [0, 1], row-major (time-major). Used both for
// encoded targets and for model prediction grids; binary rolls are the
// {0, 1}-valued special case. Immutable after construction.
class RegressionGrid {
public:
    RegressionGrid(TimeGrid grid, std::vector<double> values);

    static RegressionGrid zeros(const TimeGrid& grid);

    const TimeGrid& grid() const { return grid_; }
    int num_frames() const { return grid_.num_frames; }
    int num_keys() const { return grid_.num_keys; }

    double at(int frame, int key) const {
        return values_[static_cast<size_t>(frame) * grid_.num_keys + key];
    }

    // Contiguous copy of one key's frame series.
    std::vector<double> column(int key) const;

    const std::vector<double>& values() const { return values_; }

    bool operator==(const RegressionGrid&) const = default;

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

// Decision thresholds for note and pedal decoding, all in (0, 1).
struct Thresholds {
    double onset = 0.3;
    double offset = 0.3;
    double frame = 0.3;
    double pedal_onset = 0.3;
    double pedal_offset = 0.3;
    double pedal_frame = 0.3;

    void validate() const;
};

} // namespace pianokit
