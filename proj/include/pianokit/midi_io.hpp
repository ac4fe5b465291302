#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pianokit/core.hpp"

namespace pianokit {

// Parsed event content of one MIDI file: notes and sustain-pedal spans as
// independent streams (pedal state never stretches note offsets).
struct NoteSequence {
    std::vector<NoteEvent> notes;   // sorted by (onset, pitch)
    std::vector<PedalEvent> pedals; // sorted by onset, non-overlapping
    double duration_seconds = 0.0;  // >= every event time
};

// Sorts, validates every event, checks pedal spans for overlap and extends
// duration_seconds to cover the last offset. Throws std::invalid_argument.
NoteSequence make_note_sequence(std::vector<NoteEvent> notes, std::vector<PedalEvent> pedals,
                                double duration_seconds = 0.0);

// Reads a Standard MIDI File (format 0 or 1, PPQN timing).
//
//   - note-on with velocity > 0 opens a note; note-off or note-on with
//     velocity 0 closes it
//   - a second note-on on an open pitch truncates the first note there
//   - control change 64 with value >= 64 opens a pedal span, < 64 closes it
//   - tempo changes (meta 0x51) apply from their tick onward
//   - anything still open when the last track ends is closed there
//
// Notes outside the piano range [21, 108] are rejected. Malformed input
// raises ParseError with the offending byte offset.
NoteSequence parse_midi(std::span<const std::uint8_t> bytes);

// Emits a format-0 SMF on channel 0: one tempo event, note-on/note-off pairs
// and CC64 127/0 pairs for pedal spans. Re-parsing reproduces the sequence
// within one tick of time quantization and exactly in pitch/velocity/count.
std::vector<std::uint8_t> write_midi(const NoteSequence& seq, int ticks_per_quarter = 480,
                                     double tempo_bpm = 120.0);

} // namespace pianokit
