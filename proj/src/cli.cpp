#include "newsfame/cli.hpp"

#include "newsfame/error.hpp"
#include "newsfame/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>
#include <type_traits>

namespace fs = std::filesystem;

namespace newsfame {

namespace {

constexpr std::size_t kEffectiveGammaSamples = 10'000;

struct CommandName {
    Command command;
    std::string_view name;
};

constexpr CommandName kCommandNames[] = {
    {Command::ingest, "ingest"},
    {Command::fame, "fame"},
    {Command::equivalence, "equivalence"},
    {Command::fit_dist, "fit-dist"},
    {Command::detect_pulses, "detect-pulses"},
    {Command::fit_pulse, "fit-pulse"},
    {Command::train_hmm, "train-hmm"},
    {Command::simulate, "simulate"},
    {Command::forecast_max, "forecast-max"},
    {Command::forecast_forward, "forecast-forward"},
    {Command::forecast_ratio, "forecast-ratio"},
    {Command::backtest_max, "backtest-max"},
    {Command::backtest_ratio, "backtest-ratio"},
    {Command::report, "report"},
};

template <class T>
struct unwrap_optional {
    using type = T;
};
template <class T>
struct unwrap_optional<std::optional<T>> {
    using type = T;
};

// Every config field once: JSON key, member, help text.
template <class Visitor>
void visit_fields(Visitor&& v) {
    v("series", &RunConfig::series, "Series CSV with header entity_id,date,frequency");
    v("group", &RunConfig::group, "Group JSON {\"name\", \"members\"}; default: every entity");
    v("model", &RunConfig::model, "HMM model JSON (train-hmm output or one model)");
    v("states", &RunConfig::states, "State labels CSV from simulate; train-hmm then skips detection");
    v("output_dir", &RunConfig::output_dir, "Output directory (default $NEWSFAME_OUT or ./newsfame_out)");
    v("k_sigma", &RunConfig::k_sigma, "Pulse threshold multiple of the series std (K)");
    v("group_distance", &RunConfig::group_distance, "Days within which peaks merge (t)");
    v("ma_length", &RunConfig::ma_length, "Moving-average length for pulse extension (N)");
    v("w_m", &RunConfig::w_m, "Historical fame window in days");
    v("w_f", &RunConfig::w_f, "Future / peak fame window in days");
    v("fame_window", &RunConfig::fame_window, "Fame window for fame/equivalence; 0 = whole series");
    v("horizon_days", &RunConfig::horizon_days, "Forecast horizon in days");
    v("historical_span", &RunConfig::historical_span, "Days of history behind a ratio observation");
    v("ratio_kind", &RunConfig::ratio_kind, "peak_over_hist or avg_over_hist");
    v("x_min", &RunConfig::x_min, "Lower bound of the power-law tail");
    v("m_l", &RunConfig::m_l, "Lower historical fame bound (raw frequency)");
    v("m_u", &RunConfig::m_u, "Upper historical fame bound (exclusive)");
    v("thresholds", &RunConfig::thresholds, "Thresholds for tail probabilities");
    v("slope", &RunConfig::slope, "Use this tail slope instead of fitting");
    v("intercept", &RunConfig::intercept, "Use this tail intercept instead of fitting");
    v("population", &RunConfig::population, "Population for expected counts");
    v("periods", &RunConfig::periods, "Number of periods to extrapolate over");
    v("truncation", &RunConfig::truncation, "Left truncation point for truncated log-normal fits");
    v("entity", &RunConfig::entity, "Entity for single-entity commands");
    v("pulse_index", &RunConfig::pulse_index, "Which detected pulse fit-pulse reports");
    v("split_date", &RunConfig::split_date, "Backtest split date YYYY-MM-DD (first test day)");
    v("days", &RunConfig::days, "Days to simulate");
    v("entities", &RunConfig::entities, "Entities to simulate from a single model");
    v("start_date", &RunConfig::start_date, "First date of simulated series");
    v("seed", &RunConfig::seed, "Base RNG seed");
    v("mc_samples", &RunConfig::mc_samples, "Monte Carlo draws for the joint-argmax check");
    v("oracle_days", &RunConfig::oracle_days, "Days of joint simulation for the HMM check");
    v("allow_beta_above_gamma", &RunConfig::allow_beta_above_gamma, "Accept trained models with beta >= gamma");
    v("threads", &RunConfig::threads, "Worker threads for per-entity work");
}

std::string flag_name(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return "--" + key;
}

template <class T>
void assign_from_json(T& target, const Json& value, const std::string& key) {
    using V = typename unwrap_optional<T>::type;
    auto bad = [&](const char* expected) {
        return Error(ErrorCode::invalid_argument, "config key '" + key + "': expected " + expected);
    };
    if constexpr (!std::is_same_v<V, T>) {
        if (value.is_null()) {
            target = std::nullopt;
            return;
        }
    }
    if constexpr (std::is_same_v<V, bool>) {
        if (!value.is_boolean()) throw bad("true or false");
        target = value.get<bool>();
    } else if constexpr (std::is_integral_v<V>) {
        if (!value.is_number_unsigned()) throw bad("a non-negative integer");
        target = value.get<V>();
    } else if constexpr (std::is_floating_point_v<V>) {
        if (!value.is_number()) throw bad("a number");
        target = value.get<V>();
    } else if constexpr (std::is_same_v<V, std::string>) {
        if (!value.is_string()) throw bad("a string");
        target = value.get<std::string>();
    } else {
        if (!value.is_array()) throw bad("an array of numbers");
        V out;
        for (const auto& x : value) {
            if (!x.is_number()) throw bad("an array of numbers");
            out.push_back(x.get<double>());
        }
        target = std::move(out);
    }
}

// ---------------------------------------------------------------------------
// Output helpers

struct Context {
    const RunConfig& cfg;
    fs::path out_dir;
    Json artifacts = Json::array();

    fs::path artifact(const std::string& name) {
        artifacts.push_back(name);
        return out_dir / name;
    }

    std::ofstream open(const std::string& name) {
        const auto path = artifact(name);
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error(ErrorCode::io_error, "cannot write '" + path.string() + "'");
        return f;
    }

    void write_json(const std::string& name, const Json& j) {
        auto f = open(name);
        f << j.dump(2) << '\n';
    }

    void write_text(const std::string& name, const std::string& text) {
        auto f = open(name);
        f << text;
    }
};

// Runs task(i) for i in [0, n) on up to `threads` workers. Tasks must not throw.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& task) {
    const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) task(i);
        });
    }
    for (auto& t : pool) t.join();
}

Json error_json(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        return Json{{"code", std::string(to_string(err->code()))}, {"message", err->what()}};
    }
    return Json{{"code", "internal"}, {"message", e.what()}};
}

[[noreturn]] void rethrow_for_entity(const std::string& id, const Error& e) {
    throw Error(e.code(), "entity '" + id + "': " + e.what());
}

SeriesMap load_series(const RunConfig& cfg) {
    return read_series_csv(fs::path(cfg.series));
}

GroupDefinition load_group(const RunConfig& cfg, const SeriesMap& series) {
    GroupDefinition group = cfg.group.empty() ? group_of_all(series) : read_group_json(fs::path(cfg.group));
    member_series(group, series); // throws naming the first missing member
    return group;
}

std::string series_start(const SeriesMap& series) {
    return format_date(series.begin()->second.start_date());
}

const FrequencySeries& pick_entity(const RunConfig& cfg, const SeriesMap& series) {
    if (cfg.entity.empty()) {
        if (series.size() == 1) return series.begin()->second;
        throw Error(ErrorCode::invalid_argument, "--entity is required when the series holds several entities");
    }
    auto it = series.find(cfg.entity);
    if (it == series.end()) throw Error(ErrorCode::missing_member, "entity '" + cfg.entity + "' not in the series");
    return it->second;
}

LogNormalFit fame_fit_or_point_mass(std::span<const double> fame_values) {
    try {
        return fit_normal(fame_values);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::degenerate_sample) throw;
    }
    return {fame_values.front(), TrainOptions{}.point_mass_sigma, std::nullopt, fame_values.size()};
}

TrainOptions train_options(const RunConfig& cfg) {
    TrainOptions t;
    t.enforce_beta_below_gamma = !cfg.allow_beta_above_gamma;
    return t;
}

std::map<std::string, HmmModel> load_models(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::parse_error, path + ": " + e.what());
    }
    std::map<std::string, HmmModel> models;
    if (j.contains("models")) {
        for (const auto& [id, m] : j.at("models").items()) models.emplace(id, hmm_model_from_json(m));
    } else {
        models.emplace("", hmm_model_from_json(j));
    }
    if (models.empty()) throw Error(ErrorCode::parse_error, path + ": no models");
    return models;
}

HmmModel default_model() {
    HmmModel m;
    m.beta = 0.01;
    m.gamma = 0.2;
    m.normal_log_fame = {std::log(3.0), 0.5, std::nullopt, 0};
    m.peak_height_dist = {std::log(200.0), 0.5, std::nullopt, 0};
    m.rise_time_dist = {std::log(3.0), 0.4, std::nullopt, 0};
    return m;
}

// entity -> per-day states, read from the CSV simulate writes.
std::map<std::string, std::pair<Date, std::vector<NewsState>>> read_states_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
    std::map<std::string, std::pair<Date, std::vector<NewsState>>> out;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        return Error(ErrorCode::parse_error, path + ": line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "entity_id,date,state") throw fail("expected header entity_id,date,state");
            continue;
        }
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) throw fail("expected 3 fields");
        const std::string id = line.substr(0, c1);
        const Date date = parse_date(line.substr(c1 + 1, c2 - c1 - 1));
        const std::string state = line.substr(c2 + 1);
        if (state != "normal" && state != "peak") throw fail("state must be normal or peak");
        auto [it, fresh] = out.try_emplace(id, date, std::vector<NewsState>{});
        if (days_between(it->second.first, date) != static_cast<long>(it->second.second.size())) {
            throw fail("dates for '" + id + "' are not consecutive");
        }
        it->second.second.push_back(state == "peak" ? NewsState::peak : NewsState::normal);
    }
    return out;
}

// Pulses from Peak runs of a known state path; the peak is the run's top day.
std::vector<Pulse> pulses_from_path(const FrequencySeries& s, const StatePath& path) {
    std::vector<Pulse> pulses;
    for (std::size_t i = 0; i < path.size();) {
        if (path.states[i] != NewsState::peak) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < path.size() && path.states[j + 1] == NewsState::peak) ++j;
        std::size_t top = i;
        for (std::size_t k = i; k <= j; ++k) {
            if (s[k] > s[top]) top = k;
        }
        pulses.push_back(fit_extent(s.values(), {i, top, j}));
        i = j + 1;
    }
    return pulses;
}

PowerLawTailFit supplied_tail(const RunConfig& cfg) {
    if (cfg.slope.has_value() != cfg.intercept.has_value()) {
        throw Error(ErrorCode::invalid_argument, "--slope and --intercept must be given together");
    }
    return PowerLawTailFit::from_coefficients(*cfg.slope, *cfg.intercept, cfg.x_min);
}

// ---------------------------------------------------------------------------
// Commands. Each writes its artifacts and returns summary fields.

Json cmd_ingest(Context& ctx) {
    const auto series = load_series(ctx.cfg);
    {
        auto f = ctx.open("series.csv");
        write_series_csv(f, series);
    }
    Json entities = Json::array();
    for (const auto& [id, s] : series) {
        double total = 0.0;
        std::size_t nonzero = 0;
        for (double v : s.values()) {
            total += v;
            if (v > 0.0) ++nonzero;
        }
        entities.push_back(Json{{"entity_id", id},
                                {"days", s.size()},
                                {"total", total},
                                {"mean", total / static_cast<double>(s.size())},
                                {"nonzero_days", nonzero}});
    }
    Json j;
    j["source"] = ctx.cfg.series;
    j["start_date"] = series_start(series);
    j["end_date"] = format_date(series.begin()->second.end_date());
    j["entities"] = std::move(entities);
    if (!ctx.cfg.group.empty()) {
        const auto group = load_group(ctx.cfg, series);
        j["group"] = Json{{"name", group.name()}, {"size", group.size()}};
    }
    ctx.write_json("ingest.json", j);
    return Json{{"entities", series.size()}};
}

Json cmd_fame(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto series = load_series(cfg);
    Json entities = Json::array();
    for (const auto& [id, s] : series) {
        try {
            const std::size_t window = cfg.fame_window == 0 ? s.size() : cfg.fame_window;
            const std::size_t last = s.size() - 1;
            const FameValue f = fame(s, window, last);
            Json e;
            e["entity_id"] = id;
            e["window"] = window;
            e["average_frequency"] = windowed_mean(s.values(), window, last);
            e["fame"] = f.value;
            if (s.size() >= cfg.w_f) {
                e["peak_fame"] = peak_fame(s, 0, last, cfg.w_f).value;
                e["peak_window"] = cfg.w_f;
            }
            entities.push_back(std::move(e));
        } catch (const Error& e) {
            rethrow_for_entity(id, e);
        }
    }
    {
        auto f = ctx.open("fame_series.csv");
        f << "entity_id,date,fame\n";
        for (const auto& [id, s] : series) {
            if (s.size() < cfg.w_m) continue;
            const auto fs_ = fame_series(s, cfg.w_m);
            for (std::size_t k = 0; k < fs_.values.size(); ++k) {
                f << id << ',' << format_date(s.date_at(fs_.first_index + k)) << ',' << format_double(fs_.values[k])
                  << '\n';
            }
        }
    }
    Json j;
    j["fame_series_window"] = cfg.w_m;
    j["entities"] = entities;
    if (!cfg.group.empty()) {
        const auto group = load_group(cfg, series);
        const auto total = group_fame_series(group, series, GroupFameKind::total, cfg.w_m);
        const auto avg = group_fame_series(group, series, GroupFameKind::average, cfg.w_m);
        const auto max = group_fame_series(group, series, GroupFameKind::maximum, cfg.w_m);
        const auto& ref = *member_series(group, series).front();
        auto f = ctx.open("group_fame.csv");
        f << "date,total,average,maximum\n";
        for (std::size_t k = 0; k < total.values.size(); ++k) {
            f << format_date(ref.date_at(total.first_index + k)) << ',' << format_double(total.values[k]) << ','
              << format_double(avg.values[k]) << ',' << format_double(max.values[k]) << '\n';
        }
        j["group"] = group.name();
    }
    ctx.write_json("fame.json", j);
    return Json{{"entities", entities}};
}

Json cmd_equivalence(Context& ctx) {
    const auto series = load_series(ctx.cfg);
    const auto group = load_group(ctx.cfg, series);
    std::map<std::string, double> per_entity;
    for (const auto* s : member_series(group, series)) {
        const std::size_t window = ctx.cfg.fame_window == 0 ? s->size() : ctx.cfg.fame_window;
        per_entity[s->entity_id()] = fame(*s, window, s->size() - 1).value;
    }
    const auto points = fame_equivalence(group, per_entity);
    Json arr = Json::array();
    {
        auto f = ctx.open("equivalence.csv");
        f << "alpha_pct,beta_pct\n";
        for (const auto& p : points) {
            f << format_double(p.alpha_pct) << ',' << format_double(p.beta_pct) << '\n';
            arr.push_back(Json{{"alpha_pct", p.alpha_pct}, {"beta_pct", p.beta_pct}});
        }
    }
    ctx.write_json("equivalence.json", Json{{"group", group.name()}, {"points", arr}});
    return Json{{"points", points.size()}};
}

Json cmd_fit_dist(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto series = load_series(cfg);
    const auto group = load_group(cfg, series);
    const auto members = member_series(group, series);

    std::vector<Json> results(members.size());
    parallel_for(members.size(), cfg.threads, [&](std::size_t i) {
        const auto* s = members[i];
        Json e;
        e["entity_id"] = s->entity_id();
        try {
            const auto values = fame_series(*s, cfg.w_m).values;
            try {
                e["lognormal"] = to_json(fit_normal(values), "lognormal_mle");
            } catch (const Error& err) {
                e["lognormal"] = Json{{"error", error_json(err)}};
            }
            try {
                e["truncated_lognormal"] =
                    to_json(fit_truncated_lognormal(values, cfg.truncation), "truncated_lognormal_mle");
            } catch (const Error& err) {
                e["truncated_lognormal"] = Json{{"error", error_json(err)}};
            }
        } catch (const std::exception& err) {
            e["error"] = error_json(err);
        }
        results[i] = std::move(e);
    });

    Json j;
    j["group"] = group.name();
    j["window"] = cfg.w_m;
    j["entities"] = Json(results);

    // Group total fame: log-normal model against the empirical CCDF.
    try {
        const auto total = group_fame_series(group, series, GroupFameKind::total, cfg.w_m).values;
        const auto fit = fit_normal(total);
        const auto ccdf = empirical_ccdf(total);
        double max_gap = 0.0;
        auto f = ctx.open("group_fame_ccdf.csv");
        f << "x,prob,fitted_prob\n";
        for (const auto& p : ccdf.points) {
            const double model = lognormal_tail_prob(fit, p.x);
            max_gap = std::max(max_gap, std::abs(model - p.prob));
            f << format_double(p.x) << ',' << format_double(p.prob) << ',' << format_double(model) << '\n';
        }
        j["group_total_fame"] = Json{{"fit", to_json(fit, "lognormal_mle")}, {"max_ccdf_gap", max_gap}};
    } catch (const Error& err) {
        j["group_total_fame"] = Json{{"error", error_json(err)}};
    }

    // Entity-fame distribution across the group: power-law tail of mean frequencies.
    try {
        std::vector<double> means;
        for (const auto* s : members) means.push_back(windowed_mean(s->values(), s->size(), s->size() - 1));
        const auto ccdf = empirical_ccdf(means);
        const auto tail = fit_powerlaw_tail(ccdf, cfg.x_min);
        auto f = ctx.open("entity_fame_ccdf.csv");
        write_ccdf_csv(f, ccdf, tail);
        j["entity_fame_tail"] = to_json(tail);
    } catch (const Error& err) {
        j["entity_fame_tail"] = Json{{"error", error_json(err)}};
    }
    ctx.write_json("fit_dist.json", j);
    return Json{{"entities", members.size()}};
}

Json cmd_detect_pulses(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto series = load_series(cfg);
    const auto group = load_group(cfg, series);
    const auto members = member_series(group, series);
    const auto params = cfg.pulse_params();
    params.validate();

    std::vector<Json> results(members.size());
    std::vector<std::vector<Pulse>> pulses(members.size());
    parallel_for(members.size(), cfg.threads, [&](std::size_t i) {
        try {
            pulses[i] = detect_and_fit_pulses(*members[i], params);
            Json arr = Json::array();
            for (const auto& p : pulses[i]) arr.push_back(to_json(p, *members[i]));
            results[i] = std::move(arr);
        } catch (const std::exception& err) {
            results[i] = Json{{"error", error_json(err)}};
        }
    });

    Json entities = Json::object();
    std::size_t total = 0;
    {
        auto f = ctx.open("pulses.csv");
        f << "entity_id,start_date,peak_date,end_date,height,rise_days,residual\n";
        for (std::size_t i = 0; i < members.size(); ++i) {
            const auto* s = members[i];
            entities[s->entity_id()] = results[i];
            total += pulses[i].size();
            for (const auto& p : pulses[i]) {
                f << s->entity_id() << ',' << format_date(s->date_at(p.start_index)) << ','
                  << format_date(s->date_at(p.peak_index)) << ',' << format_date(s->date_at(p.end_index)) << ','
                  << format_double(p.height) << ',' << format_double(p.rise_days) << ','
                  << format_double(p.residual) << '\n';
            }
        }
    }
    ctx.write_json("pulses.json", Json{{"params", to_json(params)}, {"entities", entities}});
    return Json{{"pulses", total}};
}

Json cmd_fit_pulse(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto series = load_series(cfg);
    const auto& s = pick_entity(cfg, series);
    const auto pulses = detect_and_fit_pulses(s, cfg.pulse_params());
    if (cfg.pulse_index >= pulses.size()) {
        throw Error(ErrorCode::invalid_argument, "entity '" + s.entity_id() + "' has " +
                                                     std::to_string(pulses.size()) + " pulses; --pulse-index " +
                                                     std::to_string(cfg.pulse_index) + " is out of range");
    }
    const Pulse& p = pulses[cfg.pulse_index];
    {
        auto f = ctx.open("pulse_fit.csv");
        write_pulse_fit_csv(f, s.values(), p);
    }
    Json j = to_json(p, s);
    ctx.write_json("pulse_fit.json",
                   Json{{"entity_id", s.entity_id()}, {"pulse_index", cfg.pulse_index}, {"pulse", j}});
    return Json{{"pulse", j}};
}

struct TrainedModels {
    std::map<std::string, HmmModel> models;
    std::map<std::string, Json> untrained;
};

TrainedModels train_members(const RunConfig& cfg, const std::vector<const FrequencySeries*>& members) {
    const auto params = cfg.pulse_params();
    params.validate();
    std::map<std::string, std::pair<Date, std::vector<NewsState>>> states;
    if (!cfg.states.empty()) states = read_states_csv(cfg.states);

    std::vector<std::optional<HmmModel>> models(members.size());
    std::vector<Json> errors(members.size());
    parallel_for(members.size(), cfg.threads, [&](std::size_t i) {
        const auto& s = *members[i];
        try {
            if (cfg.states.empty()) {
                models[i] = train_hmm(s, params, train_options(cfg));
                return;
            }
            auto it = states.find(s.entity_id());
            if (it == states.end()) throw Error(ErrorCode::missing_member, "no state labels");
            if (it->second.first != s.start_date() || it->second.second.size() != s.size()) {
                throw Error(ErrorCode::invalid_argument, "state labels do not cover the series dates");
            }
            const StatePath path{it->second.second};
            models[i] = train_hmm(s, path, pulses_from_path(s, path), train_options(cfg));
        } catch (const std::exception& err) {
            errors[i] = error_json(err);
        }
    });
    TrainedModels out;
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (models[i]) {
            out.models.emplace(members[i]->entity_id(), *models[i]);
        } else {
            out.untrained.emplace(members[i]->entity_id(), errors[i]);
        }
    }
    return out;
}

Json cmd_train_hmm(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto series = load_series(cfg);
    const auto group = load_group(cfg, series);
    const auto trained = train_members(cfg, member_series(group, series));

    Json models = Json::object();
    for (const auto& [id, m] : trained.models) {
        Json mj = to_json(m);
        mj["effective_gamma"] = effective_gamma(m, kEffectiveGammaSamples, cfg.seed);
        mj["expected_hitting_time"] = m.beta > 0.0 ? Json(expected_hitting_time(m)) : Json(nullptr);
        models[id] = std::move(mj);
    }
    Json untrained = Json::object();
    for (const auto& [id, e] : trained.untrained) untrained[id] = e;
    Json j;
    j["params"] = to_json(cfg.pulse_params());
    j["labels"] = cfg.states.empty() ? "detected_pulses" : "state_file";
    j["seed"] = cfg.seed;
    j["models"] = models;
    j["untrained"] = untrained;
    ctx.write_json("hmm_models.json", j);
    return Json{{"trained", trained.models.size()}, {"untrained", trained.untrained.size()}};
}

Json cmd_simulate(Context& ctx) {
    const auto& cfg = ctx.cfg;
    if (cfg.days == 0) throw Error(ErrorCode::invalid_argument, "--days must be >= 1");
    std::map<std::string, HmmModel> models;
    if (!cfg.model.empty()) models = load_models(cfg.model);
    if (cfg.model.empty() || (models.size() == 1 && models.begin()->first.empty())) {
        const HmmModel base = cfg.model.empty() ? default_model() : models.begin()->second;
        if (cfg.entities == 0) throw Error(ErrorCode::invalid_argument, "--entities must be >= 1");
        models.clear();
        const std::size_t width = std::to_string(cfg.entities).size();
        for (std::size_t k = 1; k <= cfg.entities; ++k) {
            std::string num = std::to_string(k);
            models.emplace("sim" + std::string(width - num.size(), '0') + num, base);
        }
    }
    const Date start = parse_date(cfg.start_date);

    SeriesMap out;
    std::vector<std::pair<std::string, Simulation>> runs;
    Json entities = Json::array();
    std::uint64_t seed = cfg.seed;
    for (const auto& [id, m] : models) {
        auto sim = simulate(m, cfg.days, seed);
        out.emplace(id, FrequencySeries(id, start, sim.frequencies));
        entities.push_back(Json{{"entity_id", id},
                                {"seed", seed},
                                {"peak_days", sim.path.peak_days()},
                                {"pulses", sim.pulses.size()},
                                {"model", to_json(m)}});
        runs.emplace_back(id, std::move(sim));
        ++seed;
    }
    {
        auto f = ctx.open("simulated.csv");
        write_series_csv(f, out);
    }
    {
        auto f = ctx.open("states.csv");
        f << "entity_id,date,state\n";
        for (const auto& [id, sim] : runs) {
            for (std::size_t d = 0; d < sim.path.size(); ++d) {
                f << id << ',' << format_date(add_days(start, static_cast<long>(d))) << ','
                  << (sim.path.states[d] == NewsState::peak ? "peak" : "normal") << '\n';
            }
        }
    }
    ctx.write_json("simulate.json", Json{{"seed", cfg.seed},
                                         {"days", cfg.days},
                                         {"start_date", cfg.start_date},
                                         {"entities", entities}});
    return Json{{"entities", models.size()}, {"days", cfg.days}};
}

Json probability_map_json(const ProbabilityMap& m) {
    Json j = Json::object();
    for (const auto& [id, p] : m) j[id] = p;
    return j;
}

Json cmd_forecast_max(Context& ctx) {
    const auto& cfg = ctx.cfg;
    std::map<std::string, HmmModel> models;
    std::map<std::string, LogNormalFit> fits;
    Json untrained = Json::object();
    std::string group_name = "models";

    if (!cfg.series.empty()) {
        const auto series = load_series(cfg);
        const auto group = load_group(cfg, series);
        group_name = group.name();
        const auto members = member_series(group, series);
        for (const auto* s : members) {
            try {
                fits.emplace(s->entity_id(), fame_fit_or_point_mass(fame_series(*s, cfg.w_m).values));
            } catch (const Error& e) {
                rethrow_for_entity(s->entity_id(), e);
            }
        }
        if (cfg.model.empty()) {
            auto trained = train_members(cfg, members);
            models = std::move(trained.models);
            for (const auto& [id, e] : trained.untrained) untrained[id] = e;
        }
    }
    if (!cfg.model.empty()) {
        models = load_models(cfg.model);
        if (models.count("")) throw Error(ErrorCode::invalid_argument, "forecast-max needs a named set of models");
    }
    if (models.empty() && fits.empty()) throw Error(ErrorCode::insufficient_data, "no models to forecast with");

    Json j;
    j["group"] = group_name;
    j["seed"] = cfg.seed;
    if (!models.empty()) {
        Json h;
        h["probabilities"] = probability_map_json(max_fame_prob_hmm(models));
        h["joint_simulation_days"] = cfg.oracle_days;
        if (cfg.oracle_days > 0) {
            h["joint_simulation"] = probability_map_json(joint_simulation_max_prob_hmm(models, cfg.oracle_days, cfg.seed));
        }
        Json mj = Json::object();
        for (const auto& [id, m] : models) mj[id] = to_json(m);
        h["models"] = mj;
        h["untrained"] = untrained;
        j["hmm"] = h;
    }
    if (!fits.empty()) {
        Json l;
        l["window"] = cfg.w_m;
        l["probabilities"] = probability_map_json(max_fame_prob_lognormal(fits));
        l["joint_argmax_samples"] = cfg.mc_samples;
        if (cfg.mc_samples > 0) {
            l["joint_argmax"] = probability_map_json(joint_argmax_prob_lognormal(fits, cfg.mc_samples, cfg.seed));
        }
        Json fj = Json::object();
        for (const auto& [id, f] : fits) fj[id] = to_json(f, "lognormal_mle");
        l["fits"] = fj;
        j["lognormal"] = l;
    }
    ctx.write_json("max_fame.json", j);

    std::set<std::string> ids;
    for (const auto& [id, m] : models) ids.insert(id);
    for (const auto& [id, f] : fits) ids.insert(id);
    std::vector<std::vector<std::string>> rows;
    for (const auto& id : ids) {
        auto cell = [&](const char* section, const char* key) -> std::string {
            if (!j.contains(section) || !j[section].contains(key) || !j[section][key].contains(id)) return "-";
            return format_prob(j[section][key][id].get<double>());
        };
        rows.push_back({id, cell("hmm", "probabilities"), cell("hmm", "joint_simulation"),
                        cell("lognormal", "probabilities"), cell("lognormal", "joint_argmax")});
    }
    ctx.write_text("max_fame.txt",
                   format_table({"Entity", "Pr_M(HMM)", "HMM joint sim", "Pr_M(LogN)", "LogN joint MC"}, rows));
    return Json{{"entities", ids.size()}};
}

std::vector<double> require_thresholds(const RunConfig& cfg) {
    if (cfg.thresholds.empty()) throw Error(ErrorCode::invalid_argument, "--thresholds is required");
    return cfg.thresholds;
}

Json cmd_forecast_forward(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto thresholds = require_thresholds(cfg);
    ForwardFameModel model;
    if (cfg.slope || cfg.intercept) {
        if (!cfg.population) throw Error(ErrorCode::invalid_argument, "--population is required with --slope");
        model = {cfg.m_l, cfg.m_u, cfg.w_m, cfg.w_f, supplied_tail(cfg),
                 static_cast<std::size_t>(std::llround(*cfg.population))};
    } else {
        const auto series = load_series(cfg);
        const auto group = load_group(cfg, series);
        SeriesMap members;
        for (const auto* s : member_series(group, series)) members.emplace(s->entity_id(), *s);
        const auto cohort = forward_fame_cohort(members, cfg.m_l, cfg.m_u, cfg.w_m, cfg.w_f);
        model = fit_forward_fame(members, cfg.m_l, cfg.m_u, cfg.w_m, cfg.w_f, cfg.x_min);
        const auto ccdf = empirical_ccdf(cohort);
        auto f = ctx.open("forward_ccdf.csv");
        write_loglog_csv(f, ccdf, model.tail);
    }
    const double population = cfg.population.value_or(static_cast<double>(model.cohort_size));
    std::vector<ForwardRow> rows;
    Json jr = Json::array();
    for (double t : thresholds) {
        BecomeFamous r = become_famous_prob(model, t);
        r.expected_count = expected_count(r.probability, population);
        rows.push_back({t, r});
        jr.push_back(Json{{"threshold", t}, {"probability", r.probability}, {"expected_count", r.expected_count}});
    }
    ctx.write_json("forward.json", Json{{"model", to_json(model)}, {"population", population}, {"rows", jr}});
    ctx.write_text("forward.txt", forward_fame_table(model, rows));
    return Json{{"rows", jr}};
}

RatioOptions ratio_options(const RunConfig& cfg) {
    RatioOptions o;
    o.kind = parse_ratio_kind(cfg.ratio_kind);
    o.horizon_days = cfg.horizon_days;
    o.peak_window = cfg.w_f;
    o.historical_span = cfg.historical_span;
    o.x_min = cfg.x_min;
    o.validate();
    return o;
}

Json cmd_forecast_ratio(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto thresholds = require_thresholds(cfg);
    if (cfg.periods == 0) throw Error(ErrorCode::invalid_argument, "--periods must be >= 1");
    const auto options = ratio_options(cfg);
    RatioModel model;
    if (cfg.slope || cfg.intercept) {
        model = {options, supplied_tail(cfg), 0, 0};
    } else {
        const auto series = load_series(cfg);
        const auto group = load_group(cfg, series);
        const auto samples =
            collect_ratios(series, group, options, options.historical_span, std::numeric_limits<std::size_t>::max());
        model = fit_ratio_model(samples, options);
        std::vector<double> ratios;
        for (const auto& s : samples.samples) ratios.push_back(s.ratio);
        auto f = ctx.open("ratio_ccdf.csv");
        write_loglog_csv(f, empirical_ccdf(ratios), model.tail);
    }
    const double population = cfg.population.value_or(static_cast<double>(model.observations));
    Json jr = Json::array();
    std::vector<std::vector<std::string>> rows;
    for (double t : thresholds) {
        if (!(t >= model.tail.x_min)) throw Error(ErrorCode::invalid_argument, "threshold below the tail's x_min");
        const double p = powerlaw_tail_prob(model.tail, t);
        const auto ex = extrapolate_n_periods(p, cfg.periods);
        jr.push_back(Json{{"threshold", t},
                          {"probability", p},
                          {"expected_count", expected_count(p, population)},
                          {"periods", cfg.periods},
                          {"probability_linear", ex.linear},
                          {"probability_exact", ex.exact}});
        rows.push_back({format_double(t), format_prob(p), format_fixed(expected_count(p, population), 2),
                        format_prob(ex.linear), format_prob(ex.exact)});
    }
    ctx.write_json("ratio.json", Json{{"model", to_json(model)}, {"population", population}, {"rows", jr}});
    ctx.write_text("ratio.txt", format_table({"x", "Pr(R>x)", "Count", "Pr_n(linear)", "Pr_n(exact)"}, rows));
    return Json{{"rows", jr}};
}

std::size_t require_split(const RunConfig& cfg, const SeriesMap& series, const GroupDefinition& group) {
    if (cfg.split_date.empty()) throw Error(ErrorCode::invalid_argument, "--split-date is required");
    return split_index_for(series, group, parse_date(cfg.split_date));
}

Json cmd_backtest_max(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto series = load_series(cfg);
    const auto group = load_group(cfg, series);
    const std::size_t split = require_split(cfg, series, group);
    MaxFameBacktestOptions options;
    options.window = cfg.w_m;
    options.pulse = cfg.pulse_params();
    options.train = train_options(cfg);
    const auto report = backtest_max_fame(series, group, split, options);
    const auto& ref = *member_series(group, series).front();
    Json j = to_json(report, ref);
    ctx.write_json("backtest_max.json", j);
    ctx.write_text("backtest_max.txt", max_fame_table(report));
    return Json{{"mean_abs_error_hmm", report.mean_abs_error_hmm()},
                {"mean_abs_error_lognormal", report.mean_abs_error_lognormal()}};
}

Json cmd_backtest_ratio(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto thresholds = require_thresholds(cfg);
    const auto series = load_series(cfg);
    const auto group = load_group(cfg, series);
    const std::size_t split = require_split(cfg, series, group);
    const auto report = backtest_ratio_model(series, group, split, thresholds, ratio_options(cfg));
    ctx.write_json("backtest_ratio.json", to_json(report));
    ctx.write_text("backtest_ratio.txt", ratio_backtest_table(report));
    return Json{{"test_observations", report.test_observations}};
}

Json dispatch(Context& ctx, Command command);

Json cmd_report(Context& ctx) {
    std::vector<Command> steps = {Command::ingest, Command::fame, Command::fit_dist, Command::detect_pulses,
                                  Command::train_hmm, Command::forecast_max};
    if (!ctx.cfg.split_date.empty()) steps.push_back(Command::backtest_max);
    Json summary = Json::object();
    for (Command c : steps) summary[std::string(to_string(c))] = dispatch(ctx, c);
    ctx.write_json("report.json", Json{{"seed", ctx.cfg.seed}, {"steps", summary}});
    return Json{{"steps", steps.size()}};
}

Json dispatch(Context& ctx, Command command) {
    switch (command) {
    case Command::ingest: return cmd_ingest(ctx);
    case Command::fame: return cmd_fame(ctx);
    case Command::equivalence: return cmd_equivalence(ctx);
    case Command::fit_dist: return cmd_fit_dist(ctx);
    case Command::detect_pulses: return cmd_detect_pulses(ctx);
    case Command::fit_pulse: return cmd_fit_pulse(ctx);
    case Command::train_hmm: return cmd_train_hmm(ctx);
    case Command::simulate: return cmd_simulate(ctx);
    case Command::forecast_max: return cmd_forecast_max(ctx);
    case Command::forecast_forward: return cmd_forecast_forward(ctx);
    case Command::forecast_ratio: return cmd_forecast_ratio(ctx);
    case Command::backtest_max: return cmd_backtest_max(ctx);
    case Command::backtest_ratio: return cmd_backtest_ratio(ctx);
    case Command::report: return cmd_report(ctx);
    }
    throw Error(ErrorCode::invalid_argument, "unknown command");
}

int exit_code_for(const std::exception& e) {
    const auto* err = dynamic_cast<const Error*>(&e);
    if (!err) return 5;
    switch (err->code()) {
    case ErrorCode::invalid_argument:
    case ErrorCode::parse_error: return 2;
    case ErrorCode::io_error: return 3;
    default: return 4;
    }
}

void require_file(const std::string& path, const char* what) {
    if (!fs::is_regular_file(path)) {
        throw Error(ErrorCode::io_error, std::string(what) + " file '" + path + "' does not exist");
    }
}

} // namespace

std::string_view to_string(Command command) {
    for (const auto& c : kCommandNames) {
        if (c.command == command) return c.name;
    }
    return "unknown";
}

Command parse_command(std::string_view text) {
    for (const auto& c : kCommandNames) {
        if (c.name == text) return c.command;
    }
    throw Error(ErrorCode::invalid_argument, "unknown command '" + std::string(text) + "'");
}

const std::vector<Command>& all_commands() {
    static const std::vector<Command> all = [] {
        std::vector<Command> v;
        for (const auto& c : kCommandNames) v.push_back(c.command);
        return v;
    }();
    return all;
}

std::string default_output_dir() {
    const char* env = std::getenv("NEWSFAME_OUT");
    return env && *env ? std::string(env) : std::string("newsfame_out");
}

void apply_config_json(RunConfig& config, const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "config must be a JSON object");
    std::set<std::string> known;
    visit_fields([&](const char* key, auto member, const char*) {
        known.insert(key);
        if (j.contains(key)) assign_from_json(config.*member, j.at(key), key);
    });
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw Error(ErrorCode::invalid_argument, "unknown config key '" + key + "'");
    }
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open config '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::parse_error, "config '" + path + "': " + e.what());
    }
    apply_config_json(base, j);
    return base;
}

void validate_config(const RunConfig& config, Command command) {
    if (config.output_dir.empty()) throw Error(ErrorCode::invalid_argument, "output directory is empty");
    const bool supplied = config.slope.has_value() || config.intercept.has_value();
    const bool series_optional = command == Command::simulate || command == Command::forecast_max ||
                                 ((command == Command::forecast_forward || command == Command::forecast_ratio) &&
                                  supplied);
    if (config.series.empty() && !series_optional) {
        throw Error(ErrorCode::invalid_argument, "--series is required for " + std::string(to_string(command)));
    }
    if (command == Command::forecast_max && config.series.empty() && config.model.empty()) {
        throw Error(ErrorCode::invalid_argument, "forecast-max needs --series or --model");
    }
    if (!config.series.empty()) require_file(config.series, "series");
    if (!config.group.empty()) require_file(config.group, "group");
    if (!config.model.empty()) require_file(config.model, "model");
    if (!config.states.empty()) require_file(config.states, "states");
    if (config.w_m == 0 || config.w_f == 0) throw Error(ErrorCode::invalid_argument, "fame windows must be >= 1");
    if (!(config.x_min > 0.0)) throw Error(ErrorCode::invalid_argument, "--x-min must be positive");
    config.pulse_params().validate();
}

int run_command(const RunConfig& config, Command command, std::ostream& out, std::ostream& err) {
    try {
        validate_config(config, command);
        Context ctx{config, fs::path(config.output_dir)};
        std::error_code ec;
        fs::create_directories(ctx.out_dir, ec);
        if (ec) throw Error(ErrorCode::io_error, "cannot create '" + config.output_dir + "': " + ec.message());
        Json summary;
        summary["command"] = std::string(to_string(command));
        summary["status"] = "ok";
        summary["output_dir"] = config.output_dir;
        summary["result"] = dispatch(ctx, command);
        summary["artifacts"] = ctx.artifacts;
        out << summary.dump(2) << '\n';
        return 0;
    } catch (const std::exception& e) {
        Json j = error_json(e);
        j["command"] = std::string(to_string(command));
        if (const auto* nc = dynamic_cast<const NonConvergenceError*>(&e)) {
            j["best_iterate"] = nc->best_iterate();
            j["residual"] = nc->residual();
        }
        err << Json{{"error", j}}.dump() << '\n';
        return exit_code_for(e);
    }
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"newsfame: fame time series, news pulses and fame forecasts"};
    std::string footer = "Commands:";
    for (const auto& c : kCommandNames) footer += " " + std::string(c.name);
    footer += "\nEnvironment: NEWSFAME_OUT sets the default output directory.";
    app.footer(footer);

    std::string command_text;
    std::string config_path;
    app.add_option("command", command_text, "Command to run")->required();
    app.add_option("--config", config_path, "JSON config file; flags override its keys");

    std::vector<std::function<void(RunConfig&)>> overrides;
    visit_fields([&](const char* key, auto member, const char* help) {
        using T = std::remove_reference_t<decltype(std::declval<RunConfig&>().*member)>;
        using V = typename unwrap_optional<T>::type;
        auto value = std::make_shared<V>();
        CLI::Option* opt = nullptr;
        if constexpr (std::is_same_v<V, bool>) {
            opt = app.add_flag(flag_name(key), *value, help);
        } else if constexpr (std::is_same_v<V, std::vector<double>>) {
            opt = app.add_option(flag_name(key), *value, help)->delimiter(',');
        } else {
            opt = app.add_option(flag_name(key), *value, help);
        }
        overrides.push_back([=](RunConfig& c) {
            if (opt->count() > 0) c.*member = *value;
        });
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << Json{{"error", {{"code", "invalid_argument"}, {"message", e.what()}}}}.dump() << '\n';
        return 2;
    }

    Command command;
    RunConfig config;
    config.output_dir = default_output_dir();
    try {
        command = parse_command(command_text);
        if (!config_path.empty()) config = load_config_file(config_path, config);
    } catch (const std::exception& e) {
        Json j = error_json(e);
        j["command"] = command_text;
        err << Json{{"error", j}}.dump() << '\n';
        return exit_code_for(e);
    }
    for (const auto& apply : overrides) apply(config);
    return run_command(config, command, out, err);
}

} // namespace newsfame
