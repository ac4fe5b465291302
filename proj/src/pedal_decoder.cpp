#include "pianokit/pedal_decoder.hpp"

#include <cmath>
#include <unordered_map>

#include "pianokit/peak_refine.hpp"

namespace pianokit {

void PedalGridBundle::validate() const {
    if (frame.grid().num_keys != 1) {
        throw std::invalid_argument("pedal bundle needs a single channel, got " +
                                    std::to_string(frame.grid().num_keys) + " keys");
    }
    if (onset_reg.grid() != frame.grid() || offset_reg.grid() != frame.grid()) {
        throw std::invalid_argument("pedal bundle grids have mismatched dimensions");
    }
}

std::vector<PedalEvent> decode_pedals(const PedalGridBundle& bundle,
                                      const Thresholds& thresholds) {
    bundle.validate();
    thresholds.validate();
    const TimeGrid& grid = bundle.frame.grid();
    const std::vector<double> frame_col = bundle.frame.column(0);
    const std::vector<double> offset_col = bundle.offset_reg.column(0);

    // Refined offset candidates, indexed by their argmax frame.
    std::unordered_map<int, double> offset_at_frame;
    for (const RefinedPeak& peak :
         detect_and_refine(offset_col, thresholds.pedal_offset, grid)) {
        offset_at_frame.emplace(peak.frame_index, peak.refined_time_seconds);
    }

    std::vector<PedalEvent> pedals;
    bool open = false;
    double onset_time = 0.0;
    for (int t = 1; t < grid.num_frames; ++t) {
        if (!open) {
            if (frame_col[t] > thresholds.pedal_onset && frame_col[t] > frame_col[t - 1]) {
                open = true;
                onset_time = t * grid.hop_seconds;
            }
            continue;
        }
        double close_time;
        if (auto it = offset_at_frame.find(t); it != offset_at_frame.end()) {
            close_time = it->second;
        } else if (frame_col[t] < thresholds.pedal_frame) {
            close_time = t * grid.hop_seconds;
        } else {
            continue;
        }
        if (close_time > onset_time) {
            pedals.push_back(PedalEvent{onset_time, close_time});
            open = false;
        }
    }
    if (open && grid.clip_end_time() > onset_time) {
        pedals.push_back(PedalEvent{onset_time, grid.clip_end_time()});
    }
    return pedals;
}

} // namespace pianokit
