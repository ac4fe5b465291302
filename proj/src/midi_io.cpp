#include "pianokit/midi_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

namespace pianokit {
namespace {

constexpr int kSustainController = 64;
constexpr std::uint32_t kDefaultUsPerQuarter = 500000; // 120 BPM
constexpr std::uint32_t kMaxVlq = 0x0FFFFFFF;

ParseError parse_error(const std::string& what, size_t offset) {
    return ParseError(what + " at byte " + std::to_string(offset));
}

// Bounds-checked reader over the input bytes.
class Cursor {
public:
    explicit Cursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    size_t offset() const { return pos_; }

    std::uint8_t peek() const {
        require(1, "unexpected end of data");
        return bytes_[pos_];
    }

    std::uint8_t read_u8() {
        require(1, "unexpected end of data");
        return bytes_[pos_++];
    }

    std::uint16_t read_u16be() {
        require(2, "unexpected end of data");
        std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] << 8 | bytes_[pos_ + 1]);
        pos_ += 2;
        return v;
    }

    std::uint32_t read_u32be() {
        require(4, "unexpected end of data");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = v << 8 | bytes_[pos_ + i];
        pos_ += 4;
        return v;
    }

    std::uint32_t read_vlq() {
        std::uint32_t value = 0;
        for (int i = 0; i < 4; ++i) {
            std::uint8_t byte = read_u8();
            value = value << 7 | (byte & 0x7F);
            if ((byte & 0x80) == 0) return value;
        }
        throw parse_error("variable-length quantity longer than 4 bytes", pos_);
    }

    void skip(size_t n, const char* what) {
        require(n, what);
        pos_ += n;
    }

    void require(size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) throw parse_error(what, pos_);
    }

private:
    std::span<const std::uint8_t> bytes_;
    size_t pos_ = 0;
};

enum class RawKind { NoteOff, PedalOff, NoteOn, PedalOn };

struct RawEvent {
    std::uint64_t tick;
    RawKind kind;
    int pitch;    // notes only
    int velocity; // note-on only
    size_t order; // position in the merged stream, for a stable sort
};

struct TempoChange {
    std::uint64_t tick;
    std::uint32_t us_per_quarter;
};

// Piecewise-linear tick -> seconds map built from the tempo events.
class TempoMap {
public:
    TempoMap(std::vector<TempoChange> changes, int ticks_per_quarter)
        : tpq_(ticks_per_quarter) {
        std::stable_sort(changes.begin(), changes.end(),
                         [](const TempoChange& a, const TempoChange& b) { return a.tick < b.tick; });
        ticks_.push_back(0);
        seconds_.push_back(0.0);
        tempos_.push_back(kDefaultUsPerQuarter);
        for (const TempoChange& c : changes) {
            if (c.tick == ticks_.back()) {
                tempos_.back() = c.us_per_quarter; // same tick: last one wins
                continue;
            }
            double sec = seconds_.back() + span_seconds(ticks_.back(), c.tick, tempos_.back());
            ticks_.push_back(c.tick);
            seconds_.push_back(sec);
            tempos_.push_back(c.us_per_quarter);
        }
    }

    double seconds_at(std::uint64_t tick) const {
        const size_t i =
            std::upper_bound(ticks_.begin(), ticks_.end(), tick) - ticks_.begin() - 1;
        return seconds_[i] + span_seconds(ticks_[i], tick, tempos_[i]);
    }

private:
    double span_seconds(std::uint64_t from, std::uint64_t to, std::uint32_t us_per_quarter) const {
        return static_cast<double>(to - from) * us_per_quarter / (tpq_ * 1e6);
    }

    int tpq_;
    std::vector<std::uint64_t> ticks_;
    std::vector<double> seconds_;
    std::vector<std::uint32_t> tempos_;
};

// Reads one track chunk, appending raw note/pedal events and tempo changes.
// Returns the tick of the end of the track.
std::uint64_t read_track(Cursor& cursor, std::vector<RawEvent>& events,
                         std::vector<TempoChange>& tempos) {
    const size_t chunk_start = cursor.offset();
    if (cursor.read_u32be() != 0x4D54726Bu) { // "MTrk"
        throw parse_error("expected MTrk chunk", chunk_start);
    }
    const std::uint32_t length = cursor.read_u32be();
    cursor.require(length, "track chunk shorter than its declared length");
    const size_t chunk_end = cursor.offset() + length;

    std::uint64_t tick = 0;
    std::optional<std::uint8_t> running_status;
    while (cursor.offset() < chunk_end) {
        tick += cursor.read_vlq();
        std::uint8_t status;
        if (cursor.peek() & 0x80) {
            status = cursor.read_u8();
        } else if (running_status) {
            status = *running_status;
        } else {
            throw parse_error("data byte with no running status", cursor.offset());
        }

        if (status == 0xFF) { // meta event
            running_status.reset();
            std::uint8_t type = cursor.read_u8();
            std::uint32_t len = cursor.read_vlq();
            if (type == 0x51) {
                if (len != 3) throw parse_error("tempo meta event must carry 3 bytes", cursor.offset());
                std::uint32_t us = 0;
                for (int i = 0; i < 3; ++i) us = us << 8 | cursor.read_u8();
                if (us == 0) throw parse_error("tempo of 0 microseconds per quarter", cursor.offset());
                tempos.push_back(TempoChange{tick, us});
            } else if (type == 0x2F) {
                cursor.skip(len, "end-of-track event overruns chunk");
                break; // end of track
            } else {
                cursor.skip(len, "meta event overruns chunk");
            }
            continue;
        }
        if (status == 0xF0 || status == 0xF7) { // sysex
            running_status.reset();
            std::uint32_t len = cursor.read_vlq();
            cursor.skip(len, "sysex event overruns chunk");
            continue;
        }
        if (status >= 0xF0) {
            throw parse_error("unexpected system message in file", cursor.offset());
        }

        running_status = status;
        const std::uint8_t high = status & 0xF0;
        const std::uint8_t data1 = cursor.read_u8();
        const bool two_bytes = high != 0xC0 && high != 0xD0;
        const std::uint8_t data2 = two_bytes ? cursor.read_u8() : 0;
        if ((data1 & 0x80) || (data2 & 0x80)) {
            throw parse_error("data byte with high bit set", cursor.offset() - 1);
        }

        if (high == 0x90 && data2 > 0) {
            events.push_back(RawEvent{tick, RawKind::NoteOn, data1, data2, events.size()});
        } else if (high == 0x80 || (high == 0x90 && data2 == 0)) {
            events.push_back(RawEvent{tick, RawKind::NoteOff, data1, 0, events.size()});
        } else if (high == 0xB0 && data1 == kSustainController) {
            RawKind kind = data2 >= 64 ? RawKind::PedalOn : RawKind::PedalOff;
            events.push_back(RawEvent{tick, kind, 0, 0, events.size()});
        }
    }
    if (cursor.offset() > chunk_end) {
        throw parse_error("event data overruns track chunk", cursor.offset());
    }
    // Skip anything after an early end-of-track meta.
    cursor.skip(chunk_end - cursor.offset(), "track chunk shorter than its declared length");
    return tick;
}

} // namespace

NoteSequence make_note_sequence(std::vector<NoteEvent> notes, std::vector<PedalEvent> pedals,
                                double duration_seconds) {
    for (const NoteEvent& n : notes) validate_note(n);
    for (const PedalEvent& p : pedals) validate_pedal(p);
    std::sort(notes.begin(), notes.end(), [](const NoteEvent& a, const NoteEvent& b) {
        return std::tie(a.onset_seconds, a.pitch, a.offset_seconds) <
               std::tie(b.onset_seconds, b.pitch, b.offset_seconds);
    });
    std::sort(pedals.begin(), pedals.end(), [](const PedalEvent& a, const PedalEvent& b) {
        return a.onset_seconds < b.onset_seconds;
    });
    for (size_t i = 1; i < pedals.size(); ++i) {
        if (pedals[i].onset_seconds < pedals[i - 1].offset_seconds) {
            throw std::invalid_argument("pedal spans overlap near t = " +
                                        std::to_string(pedals[i].onset_seconds));
        }
    }
    NoteSequence seq;
    seq.duration_seconds = duration_seconds;
    for (const NoteEvent& n : notes) {
        seq.duration_seconds = std::max(seq.duration_seconds, n.offset_seconds);
    }
    for (const PedalEvent& p : pedals) {
        seq.duration_seconds = std::max(seq.duration_seconds, p.offset_seconds);
    }
    seq.notes = std::move(notes);
    seq.pedals = std::move(pedals);
    return seq;
}

NoteSequence parse_midi(std::span<const std::uint8_t> bytes) {
    Cursor cursor(bytes);
    if (cursor.read_u32be() != 0x4D546864u) { // "MThd"
        throw parse_error("not a Standard MIDI File (bad MThd magic)", 0);
    }
    const std::uint32_t header_len = cursor.read_u32be();
    if (header_len < 6) throw parse_error("MThd length must be >= 6", 4);
    const std::uint16_t format = cursor.read_u16be();
    const std::uint16_t num_tracks = cursor.read_u16be();
    const std::uint16_t division = cursor.read_u16be();
    cursor.skip(header_len - 6, "MThd chunk shorter than its declared length");

    if (format > 1) {
        throw parse_error("only SMF format 0 and 1 are supported, got format " +
                              std::to_string(format),
                          8);
    }
    if (division & 0x8000) {
        throw parse_error("SMPTE time division is not supported", 12);
    }
    if (division == 0) {
        throw parse_error("ticks-per-quarter of 0", 12);
    }
    if (format == 0 && num_tracks != 1) {
        throw parse_error("format 0 file must contain exactly 1 track", 10);
    }

    std::vector<RawEvent> events;
    std::vector<TempoChange> tempos;
    std::uint64_t end_tick = 0;
    for (int i = 0; i < num_tracks; ++i) {
        end_tick = std::max(end_tick, read_track(cursor, events, tempos));
    }

    TempoMap tempo_map(std::move(tempos), division);

    // Same tick: offs before ons, so a repeated note closes before it reopens.
    std::stable_sort(events.begin(), events.end(), [](const RawEvent& a, const RawEvent& b) {
        return std::tie(a.tick, a.kind, a.order) < std::tie(b.tick, b.kind, b.order);
    });

    std::vector<NoteEvent> notes;
    std::vector<PedalEvent> pedals;
    std::array<std::optional<std::pair<double, int>>, 128> open_notes; // pitch -> (onset, velocity)
    bool pedal_open = false;
    double pedal_onset = 0.0;

    auto close_note = [&](int pitch, double at) {
        auto& open = open_notes[pitch];
        if (!open) return;
        if (at > open->first) {
            notes.push_back(NoteEvent{pitch, open->first, at, open->second});
        }
        open.reset();
    };

    for (const RawEvent& ev : events) {
        const double t = tempo_map.seconds_at(ev.tick);
        switch (ev.kind) {
        case RawKind::NoteOn:
            if (ev.pitch < kMinMidiPitch || ev.pitch > kMaxMidiPitch) {
                throw ParseError("MIDI note " + std::to_string(ev.pitch) +
                                 " outside the piano range [21, 108]");
            }
            close_note(ev.pitch, t); // same-pitch overlap: truncate the first note
            open_notes[ev.pitch] = std::make_pair(t, ev.velocity);
            break;
        case RawKind::NoteOff:
            close_note(ev.pitch, t);
            break;
        case RawKind::PedalOn:
            if (!pedal_open) {
                pedal_open = true;
                pedal_onset = t;
            }
            break;
        case RawKind::PedalOff:
            if (pedal_open) {
                if (t > pedal_onset) pedals.push_back(PedalEvent{pedal_onset, t});
                pedal_open = false;
            }
            break;
        }
    }

    const double end_time = tempo_map.seconds_at(end_tick);
    for (int pitch = 0; pitch < 128; ++pitch) close_note(pitch, end_time);
    if (pedal_open && end_time > pedal_onset) {
        pedals.push_back(PedalEvent{pedal_onset, end_time});
    }

    return make_note_sequence(std::move(notes), std::move(pedals), end_time);
}

namespace {

struct OutEvent {
    std::uint64_t tick;
    int sort_class; // offs before ons at the same tick
    std::array<std::uint8_t, 3> message;
};

void write_vlq(std::vector<std::uint8_t>& out, std::uint64_t value) {
    if (value > kMaxVlq) {
        throw std::invalid_argument("delta time " + std::to_string(value) +
                                    " exceeds the representable tick range");
    }
    std::array<std::uint8_t, 4> buf{};
    int n = 0;
    buf[n++] = value & 0x7F;
    while (value >>= 7) buf[n++] = (value & 0x7F) | 0x80;
    for (int i = n - 1; i >= 0; --i) out.push_back(buf[i]);
}

} // namespace

std::vector<std::uint8_t> write_midi(const NoteSequence& seq, int ticks_per_quarter,
                                     double tempo_bpm) {
    if (ticks_per_quarter < 1 || ticks_per_quarter > 0x7FFF) {
        throw std::invalid_argument("ticks_per_quarter must be in [1, 32767]");
    }
    if (!(tempo_bpm > 0.0)) {
        throw std::invalid_argument("tempo_bpm must be positive");
    }
    for (const NoteEvent& n : seq.notes) validate_note(n);
    for (const PedalEvent& p : seq.pedals) validate_pedal(p);

    const std::uint32_t us_per_quarter =
        static_cast<std::uint32_t>(std::llround(60'000'000.0 / tempo_bpm));
    const double ticks_per_second = ticks_per_quarter * 1e6 / us_per_quarter;
    auto to_tick = [&](double t) -> std::uint64_t {
        return static_cast<std::uint64_t>(std::llround(t * ticks_per_second));
    };

    std::vector<OutEvent> events;
    for (const NoteEvent& n : seq.notes) {
        const std::uint8_t pitch = static_cast<std::uint8_t>(n.pitch);
        events.push_back({to_tick(n.onset_seconds), 1,
                          {0x90, pitch, static_cast<std::uint8_t>(n.velocity)}});
        events.push_back({to_tick(n.offset_seconds), 0, {0x80, pitch, 0}});
    }
    for (const PedalEvent& p : seq.pedals) {
        events.push_back({to_tick(p.onset_seconds), 1, {0xB0, kSustainController, 127}});
        events.push_back({to_tick(p.offset_seconds), 0, {0xB0, kSustainController, 0}});
    }
    std::stable_sort(events.begin(), events.end(), [](const OutEvent& a, const OutEvent& b) {
        return std::tie(a.tick, a.sort_class) < std::tie(b.tick, b.sort_class);
    });

    std::vector<std::uint8_t> track;
    // Tempo at tick 0.
    track.push_back(0x00);
    track.insert(track.end(), {0xFF, 0x51, 0x03});
    track.push_back(us_per_quarter >> 16 & 0xFF);
    track.push_back(us_per_quarter >> 8 & 0xFF);
    track.push_back(us_per_quarter & 0xFF);

    std::uint64_t tick = 0;
    for (const OutEvent& ev : events) {
        write_vlq(track, ev.tick - tick);
        tick = ev.tick;
        track.insert(track.end(), ev.message.begin(), ev.message.end());
    }
    const std::uint64_t end_tick = std::max(tick, to_tick(seq.duration_seconds));
    write_vlq(track, end_tick - tick);
    track.insert(track.end(), {0xFF, 0x2F, 0x00});

    std::vector<std::uint8_t> out;
    auto push_u32 = [&](std::uint32_t v) {
        out.push_back(v >> 24 & 0xFF);
        out.push_back(v >> 16 & 0xFF);
        out.push_back(v >> 8 & 0xFF);
        out.push_back(v & 0xFF);
    };
    auto push_u16 = [&](std::uint16_t v) {
        out.push_back(v >> 8 & 0xFF);
        out.push_back(v & 0xFF);
    };
    push_u32(0x4D546864u); // MThd
    push_u32(6);
    push_u16(0); // format 0
    push_u16(1); // one track
    push_u16(static_cast<std::uint16_t>(ticks_per_quarter));
    push_u32(0x4D54726Bu); // MTrk
    push_u32(static_cast<std::uint32_t>(track.size()));
    out.insert(out.end(), track.begin(), track.end());
    return out;
}

} // namespace pianokit
