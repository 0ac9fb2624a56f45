#pragma once

#include "newsfame/dist_fit.hpp"
#include "newsfame/forecast.hpp"
#include "newsfame/hmm.hpp"
#include "newsfame/pulse.hpp"
#include "newsfame/series.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace newsfame {

// Insertion-ordered so reports read in field order; dumps are deterministic.
using Json = nlohmann::ordered_json;

Json to_json(const LogNormalFit& fit, const std::string& fit_method = "lognormal_mle");
Json to_json(const PowerLawTailFit& fit, const std::string& fit_method = "ccdf_ols_log10");
LogNormalFit lognormal_fit_from_json(const Json& j);
PowerLawTailFit powerlaw_fit_from_json(const Json& j);

/// Pulse with calendar dates resolved against `series`.
Json to_json(const Pulse& pulse, const FrequencySeries& series);
Json to_json(const PulseDetectionParams& params);

Json to_json(const HmmModel& model);
HmmModel hmm_model_from_json(const Json& j);

Json to_json(const MaxFameReport& report, const FrequencySeries& reference);
Json to_json(const ForwardFameModel& model);
Json to_json(const RatioModel& model);
Json to_json(const RatioBacktestReport& report);

// CSV plot data ------------------------------------------------------------

/// `x,prob,fitted_prob`; fitted_prob is empty below the tail's x_min.
void write_ccdf_csv(std::ostream& out, const EmpiricalCcdf& ccdf, const PowerLawTailFit& tail);

/// `log10_x,log10_prob,fitted_log10_prob` for log-log plots of a tail fit.
void write_loglog_csv(std::ostream& out, const EmpiricalCcdf& ccdf, const PowerLawTailFit& tail);

/// `t,observed,fitted` over the pulse extent, t = 1 at the start day.
void write_pulse_fit_csv(std::ostream& out, std::span<const double> values, const Pulse& pulse);

// Text tables ----------------------------------------------------------------

/// Left-aligned first column, right-aligned rest, two-space gutters.
std::string format_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

/// Fixed-point or scientific text the way the tables print numbers.
std::string format_prob(double p);
std::string format_fixed(double v, int decimals);

std::string max_fame_table(const MaxFameReport& report);
std::string ratio_backtest_table(const RatioBacktestReport& report);

struct ForwardRow {
    double threshold = 0.0;
    BecomeFamous result;
};
std::string forward_fame_table(const ForwardFameModel& model, const std::vector<ForwardRow>& rows);

} // namespace newsfame
