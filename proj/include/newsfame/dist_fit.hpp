#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace newsfame {

/// Normal distribution over log values: mu and sigma are the mean and standard
/// deviation of ln(x). When truncation_point is set the density is renormalised
/// to the mass above it (on the same log scale).
struct LogNormalFit {
    double mu = 0.0;
    double sigma = 1.0;
    std::optional<double> truncation_point;
    std::size_t sample_size = 0;
};

/// Pr(X > x) = 10^intercept * x^slope for x >= x_min. slope is -lambda in
/// log10-log10 space, intercept is log10(c).
struct PowerLawTailFit {
    double slope = -1.0;
    double intercept = 0.0;
    double x_min = 1.0;
    std::size_t sample_size = 0; // CCDF points in the regression; 0 for supplied coefficients
    double r_squared = 1.0;

    /// Wraps published or externally supplied coefficients (no sample behind them).
    static PowerLawTailFit from_coefficients(double slope, double intercept, double x_min = 1.0);
};

struct CcdfPoint {
    double x = 0.0;
    double prob = 0.0;
};

/// Strict-exceedance CCDF: prob(x) = #{samples > x} / n at every distinct
/// positive sample x, with the prob = 0 point dropped.
struct EmpiricalCcdf {
    std::vector<CcdfPoint> points;
    std::size_t sample_size = 0;
};

double normal_cdf(double z);
/// ln(1 - Phi(z)), accurate far into the upper tail.
double log_normal_sf(double z);

/// Sample mean and population standard deviation of ln(values).
LogNormalFit fit_lognormal(std::span<const double> values);

/// Same estimator for samples that are already on the log scale.
LogNormalFit fit_normal(std::span<const double> log_values);

/// Maximum-likelihood fit of a normal left-truncated at `truncation_point`
/// to log-scale samples. Passing -infinity reduces to fit_normal.
LogNormalFit fit_truncated_lognormal(std::span<const double> log_values, double truncation_point);

/// 1 - Phi_F(level) with level on the log scale; conditioned on exceeding the
/// truncation point for truncated fits.
double lognormal_tail_prob(const LogNormalFit& fit, double log_level);

/// Values must be non-negative. Zeros count toward n but never become points,
/// so the result stays usable on log axes.
EmpiricalCcdf empirical_ccdf(std::span<const double> values);

/// Ordinary least squares of log10(prob) on log10(x) over points with x >= x_min.
PowerLawTailFit fit_powerlaw_tail(const EmpiricalCcdf& ccdf, double x_min);

/// 10^(slope * log10(x) + intercept), clamped to [0, 1].
double powerlaw_tail_prob(const PowerLawTailFit& fit, double x);

double expected_count(double prob, double population);

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

} // namespace newsfame
