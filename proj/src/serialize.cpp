#include "newsfame/serialize.hpp"

#include "newsfame/error.hpp"
#include "newsfame/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace newsfame {

namespace {

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw Error(ErrorCode::parse_error, std::string("missing field '") + key + "'");
    }
    return j.at(key);
}

double number(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (!v.is_number()) throw Error(ErrorCode::parse_error, std::string("field '") + key + "' is not a number");
    return v.get<double>();
}

} // namespace

Json to_json(const LogNormalFit& fit, const std::string& fit_method) {
    Json j;
    j["mu"] = fit.mu;
    j["sigma"] = fit.sigma;
    j["truncation_point"] = fit.truncation_point ? Json(*fit.truncation_point) : Json(nullptr);
    j["sample_size"] = fit.sample_size;
    j["fit_method"] = fit_method;
    return j;
}

Json to_json(const PowerLawTailFit& fit, const std::string& fit_method) {
    Json j;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["x_min"] = fit.x_min;
    j["sample_size"] = fit.sample_size;
    j["r_squared"] = fit.r_squared;
    j["fit_method"] = fit.sample_size == 0 ? std::string("supplied_coefficients") : fit_method;
    return j;
}

LogNormalFit lognormal_fit_from_json(const Json& j) {
    LogNormalFit fit;
    fit.mu = number(j, "mu");
    fit.sigma = number(j, "sigma");
    if (j.contains("truncation_point") && !j.at("truncation_point").is_null()) {
        fit.truncation_point = number(j, "truncation_point");
    }
    if (j.contains("sample_size")) fit.sample_size = j.at("sample_size").get<std::size_t>();
    return fit;
}

PowerLawTailFit powerlaw_fit_from_json(const Json& j) {
    PowerLawTailFit fit = PowerLawTailFit::from_coefficients(number(j, "slope"), number(j, "intercept"),
                                                              j.contains("x_min") ? number(j, "x_min") : 1.0);
    if (j.contains("sample_size")) fit.sample_size = j.at("sample_size").get<std::size_t>();
    if (j.contains("r_squared")) fit.r_squared = number(j, "r_squared");
    return fit;
}

Json to_json(const Pulse& pulse, const FrequencySeries& series) {
    Json j;
    j["start_date"] = format_date(series.date_at(pulse.start_index));
    j["peak_date"] = format_date(series.date_at(pulse.peak_index));
    j["end_date"] = format_date(series.date_at(pulse.end_index));
    j["height"] = pulse.height;
    j["rise_days"] = pulse.rise_days;
    j["residual"] = pulse.residual;
    j["amplitude"] = pulse.amplitude;
    j["length_days"] = pulse.extent().length();
    return j;
}

Json to_json(const PulseDetectionParams& params) {
    return Json{{"k_sigma", params.k_sigma}, {"group_distance", params.group_distance}, {"ma_length", params.ma_length}};
}

Json to_json(const HmmModel& model) {
    Json j;
    j["beta"] = model.beta;
    j["gamma"] = model.gamma;
    j["stationary_peak_prob"] = stationary_peak_prob(model);
    j["normal_log_fame"] = to_json(model.normal_log_fame);
    j["peak_height_dist"] = to_json(model.peak_height_dist);
    j["rise_time_dist"] = to_json(model.rise_time_dist);
    return j;
}

HmmModel hmm_model_from_json(const Json& j) {
    HmmModel model;
    model.beta = number(j, "beta");
    model.gamma = number(j, "gamma");
    model.normal_log_fame = lognormal_fit_from_json(field(j, "normal_log_fame"));
    model.peak_height_dist = lognormal_fit_from_json(field(j, "peak_height_dist"));
    model.rise_time_dist = lognormal_fit_from_json(field(j, "rise_time_dist"));
    model.validate();
    return model;
}

Json to_json(const MaxFameReport& report, const FrequencySeries& reference) {
    Json j;
    j["window"] = report.window;
    j["split_date"] = format_date(reference.date_at(report.split_index));
    j["evaluated_days"] = report.evaluated_days;
    j["tie_days"] = report.tie_days;
    j["mean_abs_error_hmm"] = report.mean_abs_error_hmm();
    j["mean_abs_error_lognormal"] = report.mean_abs_error_lognormal();
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        Json row;
        row["entity_id"] = r.entity_id;
        row["prob_hmm"] = r.prob_hmm;
        row["prob_lognormal"] = r.prob_lognormal;
        row["empirical_peak_days"] = r.empirical_peak_days;
        row["empirical_prob"] = r.empirical_prob;
        row["hmm_trained"] = r.hmm_trained;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    Json models = Json::object();
    for (const auto& [id, m] : report.hmm_models) models[id] = to_json(m);
    j["hmm_models"] = std::move(models);
    Json fits = Json::object();
    for (const auto& [id, f] : report.lognormal_fits) fits[id] = to_json(f);
    j["lognormal_fits"] = std::move(fits);
    Json untrained = Json::object();
    for (const auto& [id, why] : report.hmm_untrained_reason) untrained[id] = why;
    j["hmm_untrained"] = std::move(untrained);
    return j;
}

Json to_json(const ForwardFameModel& model) {
    Json j;
    j["m_l"] = model.m_l;
    j["m_u"] = model.m_u;
    j["w_m"] = model.w_m;
    j["w_f"] = model.w_f;
    j["cohort_size"] = model.cohort_size;
    j["tail"] = to_json(model.tail);
    return j;
}

Json to_json(const RatioModel& model) {
    Json j;
    j["kind"] = to_string(model.options.kind);
    j["horizon_days"] = model.options.horizon_days;
    j["peak_window"] = model.options.peak_window;
    j["historical_span"] = model.options.historical_span;
    j["observations"] = model.observations;
    j["zero_history_excluded"] = model.zero_history_excluded;
    j["tail"] = to_json(model.tail);
    return j;
}

Json to_json(const RatioBacktestReport& report) {
    Json j;
    j["model"] = to_json(report.model);
    j["test_observations"] = report.test_observations;
    j["test_zero_history_excluded"] = report.test_zero_history_excluded;
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        rows.push_back(Json{{"threshold", r.threshold},
                            {"empirical_count", r.empirical_count},
                            {"empirical_prob", r.empirical_prob},
                            {"slope", r.slope},
                            {"model_count", r.model_count},
                            {"model_prob", r.model_prob}});
    }
    j["rows"] = std::move(rows);
    return j;
}

void write_ccdf_csv(std::ostream& out, const EmpiricalCcdf& ccdf, const PowerLawTailFit& tail) {
    out << "x,prob,fitted_prob\n";
    for (const auto& p : ccdf.points) {
        out << format_double(p.x) << ',' << format_double(p.prob) << ',';
        if (p.x >= tail.x_min) out << format_double(powerlaw_tail_prob(tail, p.x));
        out << '\n';
    }
}

void write_loglog_csv(std::ostream& out, const EmpiricalCcdf& ccdf, const PowerLawTailFit& tail) {
    out << "log10_x,log10_prob,fitted_log10_prob\n";
    for (const auto& p : ccdf.points) {
        const double lx = std::log10(p.x);
        out << format_double(lx) << ',' << format_double(std::log10(p.prob)) << ',';
        if (p.x >= tail.x_min) out << format_double(tail.slope * lx + tail.intercept);
        out << '\n';
    }
}

void write_pulse_fit_csv(std::ostream& out, std::span<const double> values, const Pulse& pulse) {
    out << "t,observed,fitted\n";
    for (std::size_t i = pulse.start_index; i <= pulse.end_index; ++i) {
        const std::size_t t = i - pulse.start_index + 1;
        out << t << ',' << format_double(values[i]) << ','
            << format_double(pulse_shape(pulse.height, pulse.rise_days, static_cast<double>(t))) << '\n';
    }
}

std::string format_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::string out;
    auto emit = [&](const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t c = 0; c < width.size(); ++c) {
            const std::string cell = c < cells.size() ? cells[c] : "";
            const std::string pad(width[c] - cell.size(), ' ');
            if (c > 0) line += "  ";
            line += c == 0 ? cell + pad : pad + cell;
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line;
        out += '\n';
    };
    emit(header);
    std::size_t total = 0;
    for (std::size_t w : width) total += w;
    out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
    for (const auto& row : rows) emit(row);
    return out;
}

std::string format_prob(double p) {
    char buf[32];
    if (p == 0.0 || (p >= 1e-3 && p < 1e3)) {
        std::snprintf(buf, sizeof buf, "%.4f", p);
    } else {
        std::snprintf(buf, sizeof buf, "%.2E", p);
    }
    return buf;
}

std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string max_fame_table(const MaxFameReport& report) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : report.rows) {
        rows.push_back({r.entity_id, format_prob(r.prob_hmm), format_prob(r.prob_lognormal),
                        std::to_string(r.empirical_peak_days), format_prob(r.empirical_prob)});
    }
    std::string out = format_table({"Entity", "Pr_M(HMM)", "Pr_M(LogN)", "Days_M", "Pr(Days_M)"}, rows);
    out += "evaluated days " + std::to_string(report.evaluated_days) + ", ties " + std::to_string(report.tie_days) +
           ", MAE hmm " + format_fixed(report.mean_abs_error_hmm(), 4) + ", MAE lognormal " +
           format_fixed(report.mean_abs_error_lognormal(), 4) + '\n';
    return out;
}

std::string ratio_backtest_table(const RatioBacktestReport& report) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : report.rows) {
        rows.push_back({format_double(r.threshold), std::to_string(r.empirical_count), format_prob(r.empirical_prob),
                        format_fixed(r.slope, 3), format_fixed(r.model_count, 1), format_prob(r.model_prob)});
    }
    std::string out = format_table({"T", "Cnts", "Prob", "Slope", "Cnts_M", "Prob_M"}, rows);
    out += "test observations " + std::to_string(report.test_observations) + ", zero-history excluded " +
           std::to_string(report.test_zero_history_excluded) + '\n';
    return out;
}

std::string forward_fame_table(const ForwardFameModel& model, const std::vector<ForwardRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    const std::string band = format_double(model.m_l) + "-" + format_double(model.m_u);
    for (const auto& r : rows) {
        cells.push_back({band, format_double(r.threshold), format_fixed(model.tail.slope, 3),
                         format_fixed(model.tail.intercept, 3), std::to_string(model.cohort_size),
                         format_fixed(r.result.expected_count, 1), format_prob(r.result.probability)});
    }
    return format_table({"Fame", "T", "slope", "y-intercept", "Cohort", "Cnts_M", "Prob_M"}, cells);
}

} // namespace newsfame
