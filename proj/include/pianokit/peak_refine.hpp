#pragma once

#include <span>
#include <vector>

#include "pianokit/core.hpp"

namespace pianokit {

// A thresholded local maximum refined to a continuous-time estimate.
struct RefinedPeak {
    int frame_index;             // argmax frame
    double refined_time_seconds; // within half a hop of the argmax centre
    double peak_value;           // series value at the argmax frame
};

// Indices of thresholded local maxima. A plateau of equal values counts once
// and reports its first frame; boundary frames compare only the neighbour
// that exists.
std::vector<int> find_local_maxima(std::span<const double> series, double threshold);

// Continuous-time peak position from three equally spaced samples
// (x_a, y_a), (x_b, y_b), (x_c, y_c) with the maximum at b. The peak is
// modelled as a symmetric triangle: the lower shoulder is mirrored across the
// axis onto the opposite slope, which puts the axis at
//   x_b + (x_b - x_a)/2 * (y_c - y_a)/(y_b - y_a)   when y_c > y_a,
//   x_b - (x_c - x_b)/2 * (y_a - y_c)/(y_b - y_c)   when y_a > y_c,
// and at x_b exactly when y_a == y_c.
double refine_peak(double x_a, double y_a, double x_b, double y_b, double x_c, double y_c);

// find_local_maxima followed by refine_peak on each interior maximum. Maxima
// at frame 0 or T-1 have no third sample and are reported at the frame centre.
std::vector<RefinedPeak> detect_and_refine(std::span<const double> series, double threshold,
                                           const TimeGrid& grid);

} // namespace pianokit
