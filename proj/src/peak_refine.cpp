#include "pianokit/peak_refine.hpp"

#include <cmath>

namespace pianokit {

std::vector<int> find_local_maxima(std::span<const double> series, double threshold) {
    std::vector<int> maxima;
    const int n = static_cast<int>(series.size());
    int start = 0;
    while (start < n) {
        int end = start; // run [start, end] of equal values
        while (end + 1 < n && series[end + 1] == series[start]) ++end;
        const bool rises = start == 0 || series[start - 1] < series[start];
        const bool drops = end == n - 1 || series[end + 1] < series[start];
        if (rises && drops && series[start] > threshold) {
            maxima.push_back(start);
        }
        start = end + 1;
    }
    return maxima;
}

double refine_peak(double x_a, double y_a, double x_b, double y_b, double x_c, double y_c) {
    const double left = x_b - x_a;
    const double right = x_c - x_b;
    if (!(left > 0.0) || !(right > 0.0)) {
        throw std::invalid_argument("refine_peak: abscissas must be increasing");
    }
    if (std::abs(left - right) > 1e-9 * (x_c - x_a)) {
        throw std::invalid_argument("refine_peak: samples must be equally spaced");
    }
    if (y_b < y_a || y_b < y_c) {
        throw std::invalid_argument("refine_peak: middle sample must be the maximum");
    }
    if (y_a == y_c) {
        return x_b; // symmetric, flat triples included
    }
    if (y_c > y_a) {
        return x_b + 0.5 * left * (y_c - y_a) / (y_b - y_a);
    }
    return x_b - 0.5 * right * (y_a - y_c) / (y_b - y_c);
}

std::vector<RefinedPeak> detect_and_refine(std::span<const double> series, double threshold,
                                           const TimeGrid& grid) {
    if (static_cast<int>(series.size()) != grid.num_frames) {
        throw std::invalid_argument("detect_and_refine: series length " +
                                    std::to_string(series.size()) + " != num_frames " +
                                    std::to_string(grid.num_frames));
    }
    std::vector<RefinedPeak> peaks;
    const double hop = grid.hop_seconds;
    for (int i : find_local_maxima(series, threshold)) {
        double t;
        if (i == 0 || i == grid.num_frames - 1) {
            t = i * hop; // no third sample at the clip edge
        } else {
            t = refine_peak((i - 1) * hop, series[i - 1], i * hop, series[i], (i + 1) * hop,
                            series[i + 1]);
        }
        peaks.push_back(RefinedPeak{i, t, series[i]});
    }
    return peaks;
}

} // namespace pianokit
