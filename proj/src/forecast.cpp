#include "newsfame/forecast.hpp"

#include "newsfame/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace newsfame {

namespace {

LogNormalFit fit_fame_or_point_mass(std::span<const double> fame_values) {
    try {
        return fit_normal(fame_values);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::degenerate_sample) throw;
    }
    const double mu = fame_values.empty() ? 0.0 : fame_values.front();
    return {mu, TrainOptions{}.point_mass_sigma, std::nullopt, fame_values.size()};
}

double peak_window_mean(std::span<const double> v, std::size_t first, std::size_t length, std::size_t window) {
    double best = 0.0;
    for (std::size_t end = first + window - 1; end < first + length; ++end) {
        best = std::max(best, windowed_mean(v, window, end));
    }
    return best;
}

} // namespace

double pr_greater_lognormal(const LogNormalFit& fit_i, const LogNormalFit& fit_j) {
    const double scale = std::sqrt(fit_i.sigma * fit_i.sigma + fit_j.sigma * fit_j.sigma);
    if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(ErrorCode::invalid_argument, "invalid fit sigma");
    return normal_cdf((fit_i.mu - fit_j.mu) / scale);
}

MonteCarloEstimate pr_greater_lognormal_mc(const LogNormalFit& fit_i, const LogNormalFit& fit_j,
                                           std::size_t samples, std::uint64_t seed) {
    if (samples == 0) throw Error(ErrorCode::invalid_argument, "Monte Carlo needs samples > 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> di(fit_i.mu, fit_i.sigma);
    std::normal_distribution<double> dj(fit_j.mu, fit_j.sigma);
    std::size_t wins = 0;
    for (std::size_t k = 0; k < samples; ++k) {
        const double a = di(rng);
        const double b = dj(rng);
        if (a > b) ++wins;
    }
    const double n = static_cast<double>(samples);
    const double p = static_cast<double>(wins) / n;
    return {p, std::sqrt(std::max(p * (1.0 - p), 0.25 / n) / n), samples};
}

ProbabilityMap max_fame_prob_lognormal(const std::map<std::string, LogNormalFit>& fits) {
    if (fits.empty()) throw Error(ErrorCode::insufficient_data, "max-fame probability needs at least one entity");
    ProbabilityMap out;
    for (const auto& [id, fi] : fits) {
        double p = 1.0;
        for (const auto& [jd, fj] : fits) {
            if (jd != id) p *= pr_greater_lognormal(fi, fj);
        }
        out[id] = p;
    }
    return out;
}

ProbabilityMap joint_argmax_prob_lognormal(const std::map<std::string, LogNormalFit>& fits, std::size_t samples,
                                           std::uint64_t seed) {
    if (fits.empty()) throw Error(ErrorCode::insufficient_data, "max-fame probability needs at least one entity");
    if (samples == 0) throw Error(ErrorCode::invalid_argument, "Monte Carlo needs samples > 0");
    std::vector<std::string> ids;
    std::vector<std::normal_distribution<double>> dists;
    for (const auto& [id, f] : fits) {
        ids.push_back(id);
        dists.emplace_back(f.mu, f.sigma);
    }
    std::vector<std::size_t> wins(ids.size(), 0);
    std::vector<double> draw(ids.size());
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < samples; ++k) {
        for (std::size_t i = 0; i < ids.size(); ++i) draw[i] = dists[i](rng);
        const auto top = static_cast<std::size_t>(std::max_element(draw.begin(), draw.end()) - draw.begin());
        if (std::count(draw.begin(), draw.end(), draw[top]) == 1) ++wins[top];
    }
    ProbabilityMap out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out[ids[i]] = static_cast<double>(wins[i]) / static_cast<double>(samples);
    }
    return out;
}

ProbabilityMap max_fame_prob_hmm(const std::map<std::string, HmmModel>& models) {
    if (models.empty()) throw Error(ErrorCode::insufficient_data, "max-fame probability needs at least one entity");
    ProbabilityMap out;
    for (const auto& [id, mi] : models) {
        double p = stationary_peak_prob(mi);
        for (const auto& [jd, mj] : models) {
            if (jd == id) continue;
            const double pj = stationary_peak_prob(mj);
            p *= 1.0 - pj + pj * pr_greater_lognormal(mi.peak_height_dist, mj.peak_height_dist);
        }
        out[id] = p;
    }
    return out;
}

ProbabilityMap joint_simulation_max_prob_hmm(const std::map<std::string, HmmModel>& models, std::size_t days,
                                             std::uint64_t seed) {
    if (models.empty()) throw Error(ErrorCode::insufficient_data, "max-fame probability needs at least one entity");
    std::vector<std::string> ids;
    std::vector<Simulation> runs;
    std::uint64_t stream = seed;
    for (const auto& [id, m] : models) {
        ids.push_back(id);
        runs.push_back(simulate(m, days, stream++));
    }
    std::vector<std::size_t> wins(ids.size(), 0);
    for (std::size_t d = 0; d < days; ++d) {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (runs[i].path.states[d] != NewsState::peak) continue;
            const double h = runs[i].peak_heights[d];
            bool strict_max = true;
            for (std::size_t j = 0; j < ids.size() && strict_max; ++j) {
                if (j != i && runs[j].path.states[d] == NewsState::peak && runs[j].peak_heights[d] >= h) {
                    strict_max = false;
                }
            }
            if (strict_max) ++wins[i];
        }
    }
    ProbabilityMap out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out[ids[i]] = static_cast<double>(wins[i]) / static_cast<double>(days);
    }
    return out;
}

std::vector<double> forward_fame_cohort(const SeriesMap& series_map, double m_l, double m_u, std::size_t w_m,
                                        std::size_t w_f) {
    if (w_m == 0 || w_f == 0) throw Error(ErrorCode::invalid_argument, "fame windows must be >= 1");
    if (!(m_l < m_u)) throw Error(ErrorCode::invalid_argument, "historical fame bounds need m_l < m_u");
    std::vector<double> cohort;
    for (const auto& [id, s] : series_map) {
        const auto v = s.values();
        if (v.size() < w_m + w_f) continue;
        for (std::size_t d = w_m - 1; d + w_f < v.size(); ++d) {
            const double hist = windowed_mean(v, w_m, d);
            if (hist >= m_l && hist < m_u) cohort.push_back(windowed_mean(v, w_f, d + w_f));
        }
    }
    return cohort;
}

ForwardFameModel fit_forward_fame(const SeriesMap& series_map, double m_l, double m_u, std::size_t w_m,
                                  std::size_t w_f, double x_min) {
    const auto cohort = forward_fame_cohort(series_map, m_l, m_u, w_m, w_f);
    if (cohort.empty()) throw Error(ErrorCode::insufficient_data, "forward-fame cohort is empty");
    const auto ccdf = empirical_ccdf(cohort);
    return {m_l, m_u, w_m, w_f, fit_powerlaw_tail(ccdf, x_min), cohort.size()};
}

BecomeFamous become_famous_prob(const ForwardFameModel& model, double threshold) {
    if (!(threshold >= model.tail.x_min)) {
        throw Error(ErrorCode::invalid_argument, "threshold below the tail's x_min");
    }
    const double p = powerlaw_tail_prob(model.tail, threshold);
    return {p, expected_count(p, static_cast<double>(model.cohort_size))};
}

const char* to_string(RatioKind kind) {
    return kind == RatioKind::peak_over_hist ? "peak_over_hist" : "avg_over_hist";
}

RatioKind parse_ratio_kind(const std::string& text) {
    if (text == "peak_over_hist" || text == "peak" || text == "ph") return RatioKind::peak_over_hist;
    if (text == "avg_over_hist" || text == "average" || text == "ah") return RatioKind::avg_over_hist;
    throw Error(ErrorCode::invalid_argument, "unknown ratio kind '" + text + "'");
}

void RatioOptions::validate() const {
    if (horizon_days == 0 || peak_window == 0 || historical_span == 0) {
        throw Error(ErrorCode::invalid_argument, "ratio windows must be >= 1");
    }
    if (kind == RatioKind::peak_over_hist && horizon_days < peak_window) {
        throw Error(ErrorCode::invalid_argument, "horizon shorter than the peak window");
    }
    if (!(x_min > 0.0)) throw Error(ErrorCode::invalid_argument, "x_min must be positive");
}

RatioSamples collect_ratios(const SeriesMap& series_map, const GroupDefinition& group, const RatioOptions& options,
                            std::size_t first_origin, std::size_t limit) {
    options.validate();
    if (first_origin < options.historical_span) {
        throw Error(ErrorCode::insufficient_data, "first horizon starts before a full historical span");
    }
    RatioSamples out;
    for (const auto* s : member_series(group, series_map)) {
        const auto v = s->values();
        const std::size_t end = std::min(limit, v.size());
        for (std::size_t o = first_origin; o + options.horizon_days <= end; o += options.horizon_days) {
            const double h = windowed_mean(v, options.historical_span, o - 1);
            if (!(h > 0.0)) {
                ++out.zero_history_excluded;
                continue;
            }
            const double f = options.kind == RatioKind::peak_over_hist
                                 ? peak_window_mean(v, o, options.horizon_days, options.peak_window)
                                 : windowed_mean(v, options.horizon_days, o + options.horizon_days - 1);
            out.samples.push_back({s->entity_id(), o, h, f, f / h});
        }
    }
    return out;
}

RatioModel fit_ratio_model(const RatioSamples& samples, const RatioOptions& options) {
    if (samples.samples.empty()) {
        throw Error(ErrorCode::insufficient_data, "no entity with positive historical fame");
    }
    std::vector<double> ratios;
    ratios.reserve(samples.samples.size());
    for (const auto& s : samples.samples) ratios.push_back(s.ratio);
    const auto ccdf = empirical_ccdf(ratios);
    return {options, fit_powerlaw_tail(ccdf, options.x_min), ratios.size(), samples.zero_history_excluded};
}

RatioModel fit_ratio_model(const SeriesMap& series_map, const GroupDefinition& group, const RatioOptions& options) {
    const auto samples = collect_ratios(series_map, group, options, options.historical_span,
                                        std::numeric_limits<std::size_t>::max());
    return fit_ratio_model(samples, options);
}

Extrapolation extrapolate_n_periods(double prob_one_period, std::size_t n) {
    if (!(prob_one_period >= 0.0 && prob_one_period <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "probability outside [0, 1]");
    }
    if (n == 0) throw Error(ErrorCode::invalid_argument, "n must be >= 1");
    const double dn = static_cast<double>(n);
    return {std::min(1.0, dn * prob_one_period), -std::expm1(dn * std::log1p(-prob_one_period))};
}

double MaxFameReport::mean_abs_error_hmm() const {
    double sum = 0.0;
    for (const auto& r : rows) sum += std::abs(r.prob_hmm - r.empirical_prob);
    return rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
}

double MaxFameReport::mean_abs_error_lognormal() const {
    double sum = 0.0;
    for (const auto& r : rows) sum += std::abs(r.prob_lognormal - r.empirical_prob);
    return rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
}

MaxFameReport backtest_max_fame(const SeriesMap& series_map, const GroupDefinition& group, std::size_t split_index,
                                const MaxFameBacktestOptions& options) {
    const auto members = member_series(group, series_map);
    const std::size_t length = members.front()->size();
    for (const auto* s : members) {
        if (s->size() != length || s->start_date() != members.front()->start_date()) {
            throw Error(ErrorCode::invalid_argument, "member '" + s->entity_id() + "' is not on the group's date range");
        }
    }
    if (options.window == 0) throw Error(ErrorCode::invalid_argument, "fame window must be >= 1");
    if (split_index < options.window + 1) throw Error(ErrorCode::insufficient_data, "no training data before split");
    if (split_index + options.window > length) throw Error(ErrorCode::insufficient_data, "no data after split");

    MaxFameReport report;
    report.window = options.window;
    report.split_index = split_index;

    for (const auto* s : members) {
        const auto train = s->slice(0, split_index);
        const auto fames = fame_series(train, options.window);
        report.lognormal_fits.emplace(s->entity_id(), fit_fame_or_point_mass(fames.values));
        try {
            report.hmm_models.emplace(s->entity_id(), train_hmm(train, options.pulse, options.train));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::untrainable && e.code() != ErrorCode::insufficient_data) throw;
            report.hmm_untrained_reason.emplace(s->entity_id(), e.what());
        }
    }

    const auto ln_probs = max_fame_prob_lognormal(report.lognormal_fits);
    const auto hmm_probs = report.hmm_models.empty() ? ProbabilityMap{} : max_fame_prob_hmm(report.hmm_models);

    std::map<std::string, std::size_t> peak_days;
    std::vector<double> level(members.size());
    for (std::size_t d = split_index + options.window - 1; d < length; ++d) {
        for (std::size_t i = 0; i < members.size(); ++i) {
            level[i] = windowed_mean(members[i]->values(), options.window, d);
        }
        const auto top = static_cast<std::size_t>(std::max_element(level.begin(), level.end()) - level.begin());
        ++report.evaluated_days;
        if (std::count(level.begin(), level.end(), level[top]) > 1) {
            ++report.tie_days;
        } else {
            ++peak_days[members[top]->entity_id()];
        }
    }

    for (const auto* s : members) {
        MaxFameRow row;
        row.entity_id = s->entity_id();
        row.prob_lognormal = ln_probs.at(row.entity_id);
        auto h = hmm_probs.find(row.entity_id);
        row.hmm_trained = h != hmm_probs.end();
        row.prob_hmm = row.hmm_trained ? h->second : 0.0;
        row.empirical_peak_days = peak_days[row.entity_id];
        row.empirical_prob =
            static_cast<double>(row.empirical_peak_days) / static_cast<double>(report.evaluated_days);
        report.rows.push_back(std::move(row));
    }
    std::sort(report.rows.begin(), report.rows.end(),
              [](const auto& a, const auto& b) { return a.entity_id < b.entity_id; });
    return report;
}

RatioBacktestReport backtest_ratio_model(const SeriesMap& series_map, const GroupDefinition& group,
                                         std::size_t split_index, const std::vector<double>& thresholds,
                                         const RatioOptions& options) {
    options.validate();
    for (double t : thresholds) {
        if (!(t >= options.x_min)) throw Error(ErrorCode::invalid_argument, "threshold below the model's x_min");
    }
    const auto train = collect_ratios(series_map, group, options, options.historical_span, split_index);
    if (split_index < options.historical_span) {
        throw Error(ErrorCode::insufficient_data, "split leaves no historical span for the test horizons");
    }
    const auto test = collect_ratios(series_map, group, options, split_index, std::numeric_limits<std::size_t>::max());
    if (test.samples.empty() && test.zero_history_excluded == 0) {
        throw Error(ErrorCode::insufficient_data, "no complete horizon after the split");
    }

    RatioBacktestReport report;
    report.model = fit_ratio_model(train, options);
    report.test_observations = test.samples.size();
    report.test_zero_history_excluded = test.zero_history_excluded;
    const double n = static_cast<double>(test.samples.size());
    for (double t : thresholds) {
        RatioBacktestRow row;
        row.threshold = t;
        row.empirical_count = static_cast<std::size_t>(std::count_if(
            test.samples.begin(), test.samples.end(), [t](const RatioSample& s) { return s.ratio > t; }));
        row.empirical_prob = n > 0.0 ? static_cast<double>(row.empirical_count) / n : 0.0;
        row.slope = report.model.tail.slope;
        row.model_prob = powerlaw_tail_prob(report.model.tail, t);
        row.model_count = row.model_prob * n;
        report.rows.push_back(row);
    }
    return report;
}

std::size_t split_index_for(const SeriesMap& series_map, const GroupDefinition& group, Date split) {
    const auto members = member_series(group, series_map);
    const auto index = members.front()->index_of(split);
    if (!index) throw Error(ErrorCode::insufficient_data, "split date " + format_date(split) + " outside the data");
    return *index;
}

} // namespace newsfame
