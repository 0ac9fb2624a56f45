#pragma once

#include "newsfame/serialize.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace newsfame {

enum class Command {
    ingest,
    fame,
    equivalence,
    fit_dist,
    detect_pulses,
    fit_pulse,
    train_hmm,
    simulate,
    forecast_max,
    forecast_forward,
    forecast_ratio,
    backtest_max,
    backtest_ratio,
    report,
};

std::string_view to_string(Command command);
Command parse_command(std::string_view text);
const std::vector<Command>& all_commands();

/// Everything a command may read. Keys of the JSON config file are the long
/// flag names with '-' replaced by '_'; flags given on the command line win.
struct RunConfig {
    std::string series;   // ingestion CSV
    std::string group;    // group JSON; empty means every entity in the series
    std::string model;    // HMM model JSON (train-hmm output or a single model)
    std::string states;   // state labels CSV written by simulate
    std::string output_dir;

    double k_sigma = 5.0;
    std::size_t group_distance = 20;
    std::size_t ma_length = 10;

    std::size_t w_m = 1;
    std::size_t w_f = kDefaultPeakWindow;
    std::size_t fame_window = 0; // 0: the whole series
    std::size_t horizon_days = kDefaultHorizonDays;
    std::size_t historical_span = kDefaultHistoricalSpan;
    std::string ratio_kind = "peak_over_hist";

    double x_min = 1.0;
    double m_l = 0.0;
    double m_u = 20.0;
    std::vector<double> thresholds;
    std::optional<double> slope;      // supplied tail coefficients instead of a fit
    std::optional<double> intercept;
    std::optional<double> population; // expected-count base; defaults to the sample size
    std::size_t periods = 1;
    double truncation = 0.0;

    std::string entity;
    std::size_t pulse_index = 0;
    std::string split_date;

    std::size_t days = 1000;
    std::size_t entities = 1;
    std::string start_date = "2000-01-01";
    std::uint64_t seed = 42;
    std::size_t mc_samples = kDefaultMcSamples;
    std::size_t oracle_days = 100'000;
    bool allow_beta_above_gamma = false;

    std::size_t threads = 1;

    PulseDetectionParams pulse_params() const { return {k_sigma, group_distance, ma_length}; }
};

/// NEWSFAME_OUT when set, otherwise "newsfame_out".
std::string default_output_dir();

/// Overlays a JSON object onto `config`; unknown keys are rejected.
void apply_config_json(RunConfig& config, const Json& j);
RunConfig load_config_file(const std::string& path, RunConfig base = {});

/// Checks inputs needed by `command` exist and numeric fields are usable.
void validate_config(const RunConfig& config, Command command);

/// Runs one command, writing artifacts under config.output_dir. On success a
/// JSON summary goes to `out` and 0 is returned; on failure a JSON error
/// object goes to `err` and the return value is nonzero.
int run_command(const RunConfig& config, Command command, std::ostream& out, std::ostream& err);

/// Full command-line entry point (flag parsing, config file, dispatch).
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace newsfame
