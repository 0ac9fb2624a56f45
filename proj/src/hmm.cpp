#include "newsfame/hmm.hpp"

#include "newsfame/error.hpp"

#include <algorithm>
#include <cmath>

namespace newsfame {

namespace {

constexpr double kMinPulseLevel = 0.5;
constexpr double kMinSimulatedRise = 0.5;

void check_fit(const LogNormalFit& fit, const char* what) {
    if (!std::isfinite(fit.mu) || !std::isfinite(fit.sigma) || !(fit.sigma > 0.0)) {
        throw Error(ErrorCode::invalid_argument, std::string("invalid ") + what + " distribution");
    }
}

LogNormalFit fit_or_point_mass(std::span<const double> log_values, double point_mass_sigma) {
    if (log_values.size() >= 2) {
        try {
            return fit_normal(log_values);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::degenerate_sample) throw;
        }
    }
    double mean = 0.0;
    for (double v : log_values) mean += v;
    mean /= static_cast<double>(log_values.size());
    return {mean, point_mass_sigma, std::nullopt, log_values.size()};
}

struct PeakDraw {
    double height;
    double rise_days;
};

PeakDraw draw_peak(const HmmModel& model, std::mt19937_64& rng) {
    std::normal_distribution<double> height(model.peak_height_dist.mu, model.peak_height_dist.sigma);
    std::normal_distribution<double> rise(model.rise_time_dist.mu, model.rise_time_dist.sigma);
    const double h = std::exp(height(rng));
    const double q = std::max(kMinSimulatedRise, std::exp(rise(rng)));
    return {h, q};
}

} // namespace

std::size_t StatePath::peak_days() const {
    return static_cast<std::size_t>(std::count(states.begin(), states.end(), NewsState::peak));
}

void HmmModel::validate(bool require_beta_below_gamma) const {
    if (!(beta >= 0.0 && beta <= 1.0)) throw Error(ErrorCode::invalid_argument, "beta must lie in [0, 1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(ErrorCode::invalid_argument, "gamma must lie in (0, 1]");
    if (require_beta_below_gamma && !(beta < gamma)) {
        throw Error(ErrorCode::untrainable, "trained beta is not below gamma");
    }
    check_fit(normal_log_fame, "normal-state");
    check_fit(peak_height_dist, "peak-height");
    check_fit(rise_time_dist, "rise-time");
}

StatePath label_states(std::size_t length, std::span<const Pulse> pulses) {
    StatePath path{std::vector<NewsState>(length, NewsState::normal)};
    std::vector<PulseExtent> extents;
    for (const auto& p : pulses) extents.push_back(p.extent());
    std::sort(extents.begin(), extents.end(),
              [](const auto& a, const auto& b) { return a.start_index < b.start_index; });
    for (std::size_t k = 0; k < extents.size(); ++k) {
        const auto& e = extents[k];
        if (e.start_index > e.end_index || e.end_index >= length) {
            throw Error(ErrorCode::invalid_argument, "pulse extent outside series");
        }
        if (k > 0 && e.start_index <= extents[k - 1].end_index) {
            throw Error(ErrorCode::invalid_argument, "pulse extents overlap");
        }
        std::fill(path.states.begin() + static_cast<std::ptrdiff_t>(e.start_index),
                  path.states.begin() + static_cast<std::ptrdiff_t>(e.end_index + 1), NewsState::peak);
    }
    return path;
}

StatePath label_states(const FrequencySeries& series, std::span<const Pulse> pulses) {
    return label_states(series.size(), pulses);
}

HmmModel train_hmm(const FrequencySeries& series, const StatePath& path, std::span<const Pulse> pulses,
                   const TrainOptions& options) {
    if (path.size() != series.size()) {
        throw Error(ErrorCode::invalid_argument, "state path is not aligned to the series");
    }
    if (pulses.empty()) {
        throw Error(ErrorCode::untrainable, "no pulses for '" + series.entity_id() + "'; peak state is untrainable");
    }

    std::size_t normal_out = 0;
    std::size_t normal_to_peak = 0;
    std::size_t peak_out = 0;
    std::size_t peak_to_normal = 0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (path.states[i] == NewsState::normal) {
            ++normal_out;
            if (path.states[i + 1] == NewsState::peak) ++normal_to_peak;
        } else {
            ++peak_out;
            if (path.states[i + 1] == NewsState::normal) ++peak_to_normal;
        }
    }
    if (normal_out == 0) throw Error(ErrorCode::untrainable, "no Normal days with a successor");
    if (peak_out == 0) throw Error(ErrorCode::untrainable, "no Peak days with a successor");

    std::vector<double> normal_logs;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (path.states[i] == NewsState::normal) normal_logs.push_back(std::log1p(series[i]));
    }
    std::vector<double> heights;
    std::vector<double> rises;
    for (const auto& p : pulses) {
        if (!(p.height > 0.0) || !(p.rise_days > 0.0)) {
            throw Error(ErrorCode::invalid_argument, "pulse with non-positive height or rise time");
        }
        heights.push_back(std::log(p.height));
        rises.push_back(std::log(p.rise_days));
    }

    HmmModel model;
    model.beta = static_cast<double>(normal_to_peak) / static_cast<double>(normal_out);
    model.gamma = static_cast<double>(peak_to_normal) / static_cast<double>(peak_out);
    if (!(model.gamma > 0.0)) throw Error(ErrorCode::untrainable, "Peak state never exits");
    model.normal_log_fame = fit_or_point_mass(normal_logs, options.point_mass_sigma);
    model.peak_height_dist = fit_or_point_mass(heights, options.point_mass_sigma);
    model.rise_time_dist = fit_or_point_mass(rises, options.point_mass_sigma);
    model.validate(options.enforce_beta_below_gamma);
    return model;
}

HmmModel train_hmm(const FrequencySeries& series, const PulseDetectionParams& params, const TrainOptions& options) {
    const auto pulses = detect_and_fit_pulses(series, params);
    return train_hmm(series, label_states(series, pulses), pulses, options);
}

double pulse_exit_level(const HmmModel& model) {
    return std::max(kMinPulseLevel, std::expm1(model.normal_log_fame.mu));
}

std::size_t pulse_duration(double height, double rise_days, double exit_level) {
    std::size_t t = 1;
    while (static_cast<double>(t + 1) <= rise_days ||
           pulse_shape(height, rise_days, static_cast<double>(t + 1)) >= exit_level) {
        ++t;
    }
    return t;
}

Simulation simulate(const HmmModel& model, std::size_t days, std::uint64_t seed) {
    model.validate();
    if (days == 0) throw Error(ErrorCode::invalid_argument, "simulation needs at least one day");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal_draw(model.normal_log_fame.mu, model.normal_log_fame.sigma);
    std::bernoulli_distribution enter_peak(model.beta);
    const double exit_level = pulse_exit_level(model);

    Simulation out;
    out.frequencies.reserve(days);
    out.path.states.reserve(days);
    out.peak_heights.reserve(days);
    bool in_peak = false;
    while (out.frequencies.size() < days) {
        if (!in_peak) {
            out.frequencies.push_back(std::max(0.0, std::expm1(normal_draw(rng))));
            out.path.states.push_back(NewsState::normal);
            out.peak_heights.push_back(0.0);
            in_peak = enter_peak(rng);
            continue;
        }
        const PeakDraw peak = draw_peak(model, rng);
        const std::size_t length = pulse_duration(peak.height, peak.rise_days, exit_level);
        const std::size_t start = out.frequencies.size();
        for (std::size_t t = 1; t <= length && out.frequencies.size() < days; ++t) {
            out.frequencies.push_back(pulse_shape(peak.height, peak.rise_days, static_cast<double>(t)));
            out.path.states.push_back(NewsState::peak);
            out.peak_heights.push_back(peak.height);
        }
        const std::size_t end = out.frequencies.size() - 1;
        const auto rise_offset = static_cast<std::size_t>(std::max(0.0, std::ceil(peak.rise_days) - 1.0));
        out.pulses.push_back({start, std::min(end, start + rise_offset), end, peak.height, peak.rise_days,
                              pulse_amplitude(peak.height, peak.rise_days), 0.0});
        in_peak = false;
    }
    return out;
}

FrequencySeries simulate_series(const HmmModel& model, std::size_t days, std::uint64_t seed,
                                const std::string& entity_id, Date start_date) {
    return FrequencySeries(entity_id, start_date, simulate(model, days, seed).frequencies);
}

double stationary_peak_prob(const HmmModel& model) {
    if (!(model.beta + model.gamma > 0.0)) throw Error(ErrorCode::invalid_argument, "beta + gamma must be positive");
    return model.beta / (model.beta + model.gamma);
}

double expected_hitting_time(const HmmModel& model) {
    if (!(model.beta > 0.0)) throw Error(ErrorCode::invalid_argument, "beta = 0: the Peak state is never reached");
    return 1.0 / model.beta;
}

double effective_gamma(const HmmModel& model, std::size_t samples, std::uint64_t seed) {
    if (samples == 0) throw Error(ErrorCode::invalid_argument, "effective_gamma needs samples > 0");
    std::mt19937_64 rng(seed);
    const double exit_level = pulse_exit_level(model);
    double total = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const PeakDraw peak = draw_peak(model, rng);
        total += static_cast<double>(pulse_duration(peak.height, peak.rise_days, exit_level));
    }
    return static_cast<double>(samples) / total;
}

} // namespace newsfame
