#pragma once

#include "newsfame/series.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace newsfame {

/// Burst detector knobs: threshold multiple of the series standard deviation,
/// peak grouping distance in days, and moving-average length in days.
struct PulseDetectionParams {
    double k_sigma = 5.0;
    std::size_t group_distance = 20;
    std::size_t ma_length = 10;

    void validate() const;
};

struct PulseExtent {
    std::size_t start_index = 0;
    std::size_t peak_index = 0;
    std::size_t end_index = 0;

    std::size_t length() const noexcept { return end_index - start_index + 1; }
    friend bool operator==(const PulseExtent&, const PulseExtent&) = default;
};

struct PulseFit {
    double height = 0.0;    // H
    double rise_days = 1.0; // q
    double residual = 0.0;  // sum of squared errors
};

struct Pulse {
    std::size_t start_index = 0;
    std::size_t peak_index = 0;
    std::size_t end_index = 0;
    double height = 0.0;
    double rise_days = 1.0;
    double amplitude = 0.0; // A = H (e / q)^q
    double residual = 0.0;

    PulseExtent extent() const noexcept { return {start_index, peak_index, end_index}; }
};

/// Three-step burst detection:
///  1. strict local maxima above k_sigma * (whole-series standard deviation);
///     a plateau counts once, at its leftmost index;
///  2. peaks no more than group_distance apart form one group;
///  3. each group grows outwards while the length-ma_length moving average,
///     taken on the side facing away from the group, keeps strictly decreasing.
/// Overlapping results are merged, so extents come back disjoint and sorted.
/// A zero-variance series yields no pulses.
std::vector<PulseExtent> detect_pulses(std::span<const double> values, const PulseDetectionParams& params);
std::vector<PulseExtent> detect_pulses(const FrequencySeries& series, const PulseDetectionParams& params);

/// H (t/q)^q e^(q - t); zero at t = 0, maximum H at t = q.
double pulse_shape(double height, double rise_days, double t);

double pulse_amplitude(double height, double rise_days);

/// Least-squares fit of pulse_shape to segment[k] at t = k + 1. H is profiled
/// out in closed form for each q, leaving a bounded scalar search over
/// q in [0.5, segment length]; H is kept within (0, 10 * max].
PulseFit fit_pulse(std::span<const double> segment);

/// Fits the segment covered by `extent` and returns the populated pulse.
Pulse fit_extent(std::span<const double> values, const PulseExtent& extent);

std::vector<Pulse> detect_and_fit_pulses(const FrequencySeries& series, const PulseDetectionParams& params);

} // namespace newsfame
