#pragma once

#include "newsfame/dist_fit.hpp"
#include "newsfame/hmm.hpp"
#include "newsfame/pulse.hpp"
#include "newsfame/series.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace newsfame {

using ProbabilityMap = std::map<std::string, double>;

inline constexpr std::size_t kDefaultMcSamples = 1'000'000;
inline constexpr std::size_t kDefaultHorizonDays = 365;
inline constexpr std::size_t kDefaultHistoricalSpan = 365;

// ---------------------------------------------------------------------------
// Group maximum fame

/// Pr(F_i > F_j) for independent normals on the log scale:
/// Phi((mu_i - mu_j) / sqrt(sigma_i^2 + sigma_j^2)).
double pr_greater_lognormal(const LogNormalFit& fit_i, const LogNormalFit& fit_j);

struct MonteCarloEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

/// Sampling estimate of the same probability.
MonteCarloEstimate pr_greater_lognormal_mc(const LogNormalFit& fit_i, const LogNormalFit& fit_j,
                                           std::size_t samples, std::uint64_t seed);

/// Product over j != i of Pr(F_i > F_j). This treats the pairwise events as
/// independent, which they are not; joint_argmax_prob_lognormal measures the gap.
ProbabilityMap max_fame_prob_lognormal(const std::map<std::string, LogNormalFit>& fits);

/// Draws every entity jointly and counts how often each is the strict argmax.
ProbabilityMap joint_argmax_prob_lognormal(const std::map<std::string, LogNormalFit>& fits,
                                           std::size_t samples, std::uint64_t seed);

/// Pr(P_i) * prod_{j != i} [1 - Pr(P_j) + Pr(P_j) * Pr(FP_i > FP_j)], with
/// Pr(P) the stationary Peak probability and FP compared through the peak
/// height distributions.
ProbabilityMap max_fame_prob_hmm(const std::map<std::string, HmmModel>& models);

/// Simulates all entities side by side for `days` days and counts the days on
/// which entity i is in Peak and every other entity is either Normal or in
/// Peak with a smaller pulse height.
ProbabilityMap joint_simulation_max_prob_hmm(const std::map<std::string, HmmModel>& models, std::size_t days,
                                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// Forward (become-famous) model

struct ForwardFameModel {
    double m_l = 0.0;
    double m_u = 20.0;
    std::size_t w_m = 1;
    std::size_t w_f = 1;
    PowerLawTailFit tail;
    std::size_t cohort_size = 0;
};

/// Next-period mean frequencies (over w_f days) of every (entity, day) whose
/// trailing w_m-day mean lies in [m_l, m_u).
std::vector<double> forward_fame_cohort(const SeriesMap& series_map, double m_l, double m_u, std::size_t w_m,
                                        std::size_t w_f);

ForwardFameModel fit_forward_fame(const SeriesMap& series_map, double m_l, double m_u, std::size_t w_m,
                                  std::size_t w_f, double x_min);

struct BecomeFamous {
    double probability = 0.0;
    double expected_count = 0.0;
};

BecomeFamous become_famous_prob(const ForwardFameModel& model, double threshold);

// ---------------------------------------------------------------------------
// Fame-change ratio models

enum class RatioKind { peak_over_hist, avg_over_hist };

const char* to_string(RatioKind kind);
RatioKind parse_ratio_kind(const std::string& text);

struct RatioOptions {
    RatioKind kind = RatioKind::peak_over_hist;
    std::size_t horizon_days = kDefaultHorizonDays;
    std::size_t peak_window = kDefaultPeakWindow;
    std::size_t historical_span = kDefaultHistoricalSpan;
    double x_min = 1.0;

    void validate() const;
};

struct RatioSample {
    std::string entity_id;
    std::size_t origin = 0; // first day of the forecast horizon
    double historical = 0.0;
    double future = 0.0;
    double ratio = 0.0;
};

struct RatioSamples {
    std::vector<RatioSample> samples;
    std::size_t zero_history_excluded = 0;
};

/// Ratio observations for horizons starting at first_origin and then every
/// horizon_days, as long as the horizon ends at or before `limit`. The
/// historical fame is the raw mean frequency over the historical_span days
/// before the origin; the future fame is the peak w_f-window mean (peak kind)
/// or the plain mean (average kind) over the horizon. Zero-history
/// observations are excluded and counted.
RatioSamples collect_ratios(const SeriesMap& series_map, const GroupDefinition& group, const RatioOptions& options,
                            std::size_t first_origin, std::size_t limit);

struct RatioModel {
    RatioOptions options;
    PowerLawTailFit tail;
    std::size_t observations = 0;
    std::size_t zero_history_excluded = 0;
};

/// Fits the power-law tail of the ratio CCDF over every horizon that fits in
/// the data, the first one starting right after historical_span.
RatioModel fit_ratio_model(const SeriesMap& series_map, const GroupDefinition& group, const RatioOptions& options);

RatioModel fit_ratio_model(const RatioSamples& samples, const RatioOptions& options);

struct Extrapolation {
    double linear = 0.0; // min(1, n p)
    double exact = 0.0;  // 1 - (1 - p)^n
};

Extrapolation extrapolate_n_periods(double prob_one_period, std::size_t n);

// ---------------------------------------------------------------------------
// Backtests

struct MaxFameRow {
    std::string entity_id;
    double prob_hmm = 0.0;
    double prob_lognormal = 0.0;
    std::size_t empirical_peak_days = 0;
    double empirical_prob = 0.0;
    bool hmm_trained = false;
};

struct MaxFameReport {
    std::vector<MaxFameRow> rows; // sorted by entity_id
    std::size_t window = 1;
    std::size_t split_index = 0;
    std::size_t evaluated_days = 0;
    std::size_t tie_days = 0;
    std::map<std::string, LogNormalFit> lognormal_fits;
    std::map<std::string, HmmModel> hmm_models; // trainable members only
    std::map<std::string, std::string> hmm_untrained_reason;

    double mean_abs_error_hmm() const;
    double mean_abs_error_lognormal() const;
};

struct MaxFameBacktestOptions {
    std::size_t window = 1;
    PulseDetectionParams pulse;
    TrainOptions train;
};

/// Trains both max-fame models on days before split_index and scores them
/// against the realised peak days after it. A peak day is one on which an
/// entity holds the strict group maximum windowed fame; ties go to nobody
/// and are counted. Members whose HMM cannot be trained never peak.
MaxFameReport backtest_max_fame(const SeriesMap& series_map, const GroupDefinition& group, std::size_t split_index,
                                const MaxFameBacktestOptions& options = {});

struct RatioBacktestRow {
    double threshold = 0.0;
    std::size_t empirical_count = 0;
    double empirical_prob = 0.0;
    double slope = 0.0;
    double model_count = 0.0;
    double model_prob = 0.0;
};

struct RatioBacktestReport {
    RatioModel model;
    std::size_t test_observations = 0;
    std::size_t test_zero_history_excluded = 0;
    std::vector<RatioBacktestRow> rows;
};

/// Fits the ratio model on horizons that end before split_index and counts
/// threshold exceedances on horizons starting at split_index.
RatioBacktestReport backtest_ratio_model(const SeriesMap& series_map, const GroupDefinition& group,
                                         std::size_t split_index, const std::vector<double>& thresholds,
                                         const RatioOptions& options);

/// Index of `split` in the group's common date range.
std::size_t split_index_for(const SeriesMap& series_map, const GroupDefinition& group, Date split);

} // namespace newsfame
