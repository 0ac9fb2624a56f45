#include "newsfame/dist_fit.hpp"

#include "newsfame/detail/nelder_mead.hpp"
#include "newsfame/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace newsfame {

namespace {

constexpr std::size_t kTruncatedMaxIter = 1000;
constexpr double kTruncatedRelTol = 1e-8;

void require_fit(const LogNormalFit& fit) {
    if (!std::isfinite(fit.mu) || !(fit.sigma > 0.0) || !std::isfinite(fit.sigma)) {
        throw Error(ErrorCode::invalid_argument, "log-normal fit needs finite mu and sigma > 0");
    }
}

} // namespace

PowerLawTailFit PowerLawTailFit::from_coefficients(double slope, double intercept, double x_min) {
    if (!(slope < 0.0)) throw Error(ErrorCode::invalid_argument, "power-law slope must be negative");
    if (!(x_min > 0.0)) throw Error(ErrorCode::invalid_argument, "x_min must be positive");
    return {slope, intercept, x_min, 0, 1.0};
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double log_normal_sf(double z) {
    if (z < 37.0) return std::log(0.5 * std::erfc(z / std::numbers::sqrt2));
    // Mills-ratio asymptotic; erfc underflows past this point.
    const double z2 = z * z;
    return -0.5 * z2 - std::log(z * std::sqrt(2.0 * std::numbers::pi)) + std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

LogNormalFit fit_normal(std::span<const double> log_values) {
    if (log_values.size() < 2) throw Error(ErrorCode::insufficient_data, "log-normal fit needs >= 2 values");
    double mean = 0.0;
    for (double v : log_values) mean += v;
    mean /= static_cast<double>(log_values.size());
    double ss = 0.0;
    for (double v : log_values) ss += (v - mean) * (v - mean);
    const double sigma = std::sqrt(ss / static_cast<double>(log_values.size()));
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorCode::degenerate_sample, "log-normal fit on a zero-variance sample");
    }
    return {mean, sigma, std::nullopt, log_values.size()};
}

LogNormalFit fit_lognormal(std::span<const double> values) {
    if (values.size() < 2) throw Error(ErrorCode::insufficient_data, "log-normal fit needs >= 2 values");
    std::vector<double> logs;
    logs.reserve(values.size());
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw Error(ErrorCode::invalid_argument, "log-normal fit needs strictly positive values");
        }
        logs.push_back(std::log(v));
    }
    return fit_normal(logs);
}

LogNormalFit fit_truncated_lognormal(std::span<const double> log_values, double truncation_point) {
    if (std::isinf(truncation_point) && truncation_point < 0.0) return fit_normal(log_values);
    if (std::isnan(truncation_point)) throw Error(ErrorCode::invalid_argument, "truncation point is NaN");
    for (double v : log_values) {
        if (!(v >= truncation_point)) {
            throw Error(ErrorCode::invalid_argument, "sample value below the truncation point");
        }
    }
    // Untruncated moments seed the search and reject zero-variance samples.
    const LogNormalFit start = fit_normal(log_values);

    const double n = static_cast<double>(log_values.size());
    auto nll = [&](const std::array<double, 2>& p) {
        const double mu = p[0];
        const double sigma = std::exp(p[1]);
        double ss = 0.0;
        for (double v : log_values) ss += (v - mu) * (v - mu);
        return n * p[1] + ss / (2.0 * sigma * sigma) + n * log_normal_sf((truncation_point - mu) / sigma);
    };

    const auto result = detail::nelder_mead<2>(nll, {start.mu, std::log(start.sigma)},
                                               {0.25 * start.sigma, 0.25}, kTruncatedMaxIter, kTruncatedRelTol);
    const double sigma = std::exp(result.x[1]);
    if (!result.converged || !std::isfinite(result.value)) {
        throw NonConvergenceError("truncated log-normal fit did not converge", {result.x[0], sigma}, result.value);
    }
    return {result.x[0], sigma, truncation_point, log_values.size()};
}

double lognormal_tail_prob(const LogNormalFit& fit, double log_level) {
    require_fit(fit);
    if (std::isnan(log_level)) throw Error(ErrorCode::invalid_argument, "level is NaN");
    const double z = (log_level - fit.mu) / fit.sigma;
    if (!fit.truncation_point) return 1.0 - normal_cdf(z);
    const double t = *fit.truncation_point;
    if (log_level <= t) return 1.0;
    const double zt = (t - fit.mu) / fit.sigma;
    return std::clamp(std::exp(log_normal_sf(z) - log_normal_sf(zt)), 0.0, 1.0);
}

EmpiricalCcdf empirical_ccdf(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::insufficient_data, "CCDF of an empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    for (double v : sorted) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "CCDF values must be >= 0");
    }
    std::sort(sorted.begin(), sorted.end());

    EmpiricalCcdf out;
    out.sample_size = sorted.size();
    const double n = static_cast<double>(sorted.size());
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const std::size_t above = sorted.size() - j;
        if (sorted[i] > 0.0 && above > 0) out.points.push_back({sorted[i], static_cast<double>(above) / n});
        i = j;
    }
    if (out.points.empty()) throw Error(ErrorCode::degenerate_sample, "CCDF has no usable points");
    return out;
}

PowerLawTailFit fit_powerlaw_tail(const EmpiricalCcdf& ccdf, double x_min) {
    if (!(x_min > 0.0)) throw Error(ErrorCode::invalid_argument, "x_min must be positive");
    std::vector<double> lx;
    std::vector<double> ly;
    for (const auto& p : ccdf.points) {
        if (p.x >= x_min) {
            lx.push_back(std::log10(p.x));
            ly.push_back(std::log10(p.prob));
        }
    }
    if (lx.size() < 3) {
        throw Error(ErrorCode::insufficient_data,
                    "power-law tail fit needs >= 3 CCDF points at or above x_min, found " + std::to_string(lx.size()));
    }
    const double m = static_cast<double>(lx.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    const double slope = sxy / sxx;
    if (!(slope < 0.0)) throw Error(ErrorCode::degenerate_sample, "fitted tail slope is not negative");
    const double intercept = my - slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (slope * lx[i] + intercept);
        ss_res += r * r;
    }
    const double r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;

    return {slope, intercept, x_min, lx.size(), r2};
}

double powerlaw_tail_prob(const PowerLawTailFit& fit, double x) {
    if (!(x >= fit.x_min)) {
        throw Error(ErrorCode::invalid_argument, "power-law tail model is undefined below x_min");
    }
    return std::clamp(std::pow(10.0, fit.slope * std::log10(x) + fit.intercept), 0.0, 1.0);
}

double expected_count(double prob, double population) {
    if (!(prob >= 0.0 && prob <= 1.0)) throw Error(ErrorCode::invalid_argument, "probability outside [0, 1]");
    if (!(population >= 0.0)) throw Error(ErrorCode::invalid_argument, "population must be non-negative");
    return prob * population;
}

} // namespace newsfame
