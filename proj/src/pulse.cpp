#include "newsfame/pulse.hpp"

#include "newsfame/error.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace newsfame {

namespace {

constexpr std::uintmax_t kFitMaxIter = 500;
constexpr double kMinRiseDays = 0.5;
constexpr std::size_t kRiseGrid = 200;

double population_stddev(std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

// Mean of the window that extends away from the pulse on the given side.
double outward_average(std::span<const double> v, std::size_t at, std::size_t length, bool leftward) {
    std::size_t lo = at;
    std::size_t hi = at;
    if (leftward) {
        lo = at + 1 >= length ? at + 1 - length : 0;
    } else {
        hi = std::min(v.size() - 1, at + length - 1);
    }
    double sum = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) sum += v[i];
    return sum / static_cast<double>(hi - lo + 1);
}

struct Profile {
    double height;
    double sse;
};

// Best H for fixed q (linear least squares), clamped to its bounds.
Profile profile_height(std::span<const double> segment, double q, double h_max) {
    double sy = 0.0;
    double gg = 0.0;
    for (std::size_t k = 0; k < segment.size(); ++k) {
        const double g = pulse_shape(1.0, q, static_cast<double>(k + 1));
        sy += segment[k] * g;
        gg += g * g;
    }
    double h = gg > 0.0 ? sy / gg : 0.0;
    h = std::clamp(h, std::numeric_limits<double>::min(), h_max);
    double sse = 0.0;
    for (std::size_t k = 0; k < segment.size(); ++k) {
        const double r = segment[k] - pulse_shape(h, q, static_cast<double>(k + 1));
        sse += r * r;
    }
    return {h, sse};
}

} // namespace

void PulseDetectionParams::validate() const {
    if (!(k_sigma > 0.0) || group_distance == 0 || ma_length == 0) {
        throw Error(ErrorCode::invalid_argument, "pulse detection parameters must all be positive");
    }
}

std::vector<PulseExtent> detect_pulses(std::span<const double> v, const PulseDetectionParams& params) {
    params.validate();
    const std::size_t n = v.size();
    if (n <= 2 * params.ma_length) {
        throw Error(ErrorCode::insufficient_data, "pulse detection needs more than 2 * ma_length days");
    }
    const double sigma = population_stddev(v);
    if (!(sigma > 0.0)) return {};
    const double threshold = params.k_sigma * sigma;

    // Step 1: strict local maxima above the threshold.
    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < n;) {
        if (v[i] > v[i - 1]) {
            std::size_t j = i;
            while (j + 1 < n && v[j + 1] == v[i]) ++j;
            if (j + 1 < n && v[j + 1] < v[i] && v[i] > threshold) peaks.push_back(i);
            i = j + 1;
        } else {
            ++i;
        }
    }
    if (peaks.empty()) return {};

    // Step 2: chain peaks that sit within group_distance of each other.
    struct Group {
        std::size_t first;
        std::size_t last;
        std::size_t top;
    };
    std::vector<Group> groups;
    for (std::size_t p : peaks) {
        if (!groups.empty() && p - groups.back().last <= params.group_distance) {
            auto& g = groups.back();
            g.last = p;
            if (v[p] > v[g.top]) g.top = p;
        } else {
            groups.push_back({p, p, p});
        }
    }

    // Step 3: absorb neighbours while the outward moving average keeps falling.
    std::vector<PulseExtent> out;
    for (const auto& g : groups) {
        std::size_t start = g.first;
        while (start > 0 && outward_average(v, start - 1, params.ma_length, true) <
                                outward_average(v, start, params.ma_length, true)) {
            --start;
        }
        std::size_t end = g.last;
        while (end + 1 < n && outward_average(v, end + 1, params.ma_length, false) <
                                  outward_average(v, end, params.ma_length, false)) {
            ++end;
        }
        if (!out.empty() && start <= out.back().end_index) {
            auto& prev = out.back();
            prev.end_index = std::max(prev.end_index, end);
            if (v[g.top] > v[prev.peak_index]) prev.peak_index = g.top;
        } else {
            out.push_back({start, g.top, end});
        }
    }
    return out;
}

std::vector<PulseExtent> detect_pulses(const FrequencySeries& series, const PulseDetectionParams& params) {
    return detect_pulses(series.values(), params);
}

double pulse_shape(double height, double rise_days, double t) {
    if (!(rise_days > 0.0)) throw Error(ErrorCode::invalid_argument, "rise_days must be positive");
    if (t <= 0.0) return 0.0;
    return height * std::exp(rise_days * std::log(t / rise_days) + rise_days - t);
}

double pulse_amplitude(double height, double rise_days) {
    if (!(rise_days > 0.0)) throw Error(ErrorCode::invalid_argument, "rise_days must be positive");
    return height * std::exp(rise_days * (1.0 - std::log(rise_days)));
}

PulseFit fit_pulse(std::span<const double> segment) {
    if (segment.size() < 3) throw Error(ErrorCode::insufficient_data, "pulse fit needs >= 3 points");
    const double y_max = *std::max_element(segment.begin(), segment.end());
    if (!(y_max > 0.0)) throw Error(ErrorCode::degenerate_sample, "pulse segment has no positive value");

    const double h_max = 10.0 * y_max;
    const double q_lo = kMinRiseDays;
    const double q_hi = std::max(q_lo, static_cast<double>(segment.size()));
    auto sse_at = [&](double q) { return profile_height(segment, q, h_max).sse; };

    // Coarse scan (including the argmax offset) picks the basin, Brent refines it.
    const auto argmax = static_cast<std::size_t>(std::max_element(segment.begin(), segment.end()) - segment.begin());
    std::vector<double> grid;
    grid.reserve(kRiseGrid + 2);
    for (std::size_t i = 0; i <= kRiseGrid; ++i) {
        grid.push_back(q_lo + (q_hi - q_lo) * static_cast<double>(i) / static_cast<double>(kRiseGrid));
    }
    grid.push_back(std::clamp(static_cast<double>(argmax + 1), q_lo, q_hi));
    std::sort(grid.begin(), grid.end());

    std::size_t best = 0;
    double best_sse = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double s = sse_at(grid[i]);
        if (s < best_sse) {
            best_sse = s;
            best = i;
        }
    }
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];

    std::uintmax_t iterations = kFitMaxIter;
    const auto [q, sse] = boost::math::tools::brent_find_minima(sse_at, lo, hi,
                                                                std::numeric_limits<double>::digits / 2, iterations);
    const double q_best = sse <= best_sse ? q : grid[best];
    const Profile p = profile_height(segment, q_best, h_max);
    if (iterations >= kFitMaxIter || !std::isfinite(p.sse)) {
        throw NonConvergenceError("pulse fit did not converge", {p.height, q_best}, p.sse);
    }
    return {p.height, q_best, p.sse};
}

Pulse fit_extent(std::span<const double> values, const PulseExtent& extent) {
    if (extent.end_index >= values.size() || extent.start_index > extent.peak_index ||
        extent.peak_index > extent.end_index) {
        throw Error(ErrorCode::invalid_argument, "pulse extent outside series");
    }
    // Very short bursts are fitted on a window grown to the 3-point minimum.
    std::size_t lo = extent.start_index;
    std::size_t hi = extent.end_index;
    while (hi - lo + 1 < 3 && (lo > 0 || hi + 1 < values.size())) {
        if (lo > 0) --lo;
        if (hi - lo + 1 < 3 && hi + 1 < values.size()) ++hi;
    }
    const PulseFit fit = fit_pulse(values.subspan(lo, hi - lo + 1));
    return {extent.start_index, extent.peak_index, extent.end_index, fit.height, fit.rise_days,
            pulse_amplitude(fit.height, fit.rise_days), fit.residual};
}

std::vector<Pulse> detect_and_fit_pulses(const FrequencySeries& series, const PulseDetectionParams& params) {
    std::vector<Pulse> out;
    for (const auto& extent : detect_pulses(series, params)) out.push_back(fit_extent(series.values(), extent));
    return out;
}

} // namespace newsfame
