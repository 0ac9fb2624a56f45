#include "newsfame/series.hpp"

#include "newsfame/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace newsfame {

FrequencySeries::FrequencySeries(std::string entity_id, Date start_date, std::vector<double> values)
    : entity_id_(std::move(entity_id)), start_date_(start_date), values_(std::move(values)) {
    if (values_.empty()) {
        throw Error(ErrorCode::insufficient_data, "series '" + entity_id_ + "' is empty");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
            throw Error(ErrorCode::invalid_argument,
                        "series '" + entity_id_ + "' has invalid frequency at index " + std::to_string(i));
        }
    }
}

std::optional<std::size_t> FrequencySeries::index_of(Date date) const {
    const long offset = days_between(start_date_, date);
    if (offset < 0 || static_cast<std::size_t>(offset) >= values_.size()) return std::nullopt;
    return static_cast<std::size_t>(offset);
}

FrequencySeries FrequencySeries::slice(std::size_t first, std::size_t count) const {
    if (count == 0 || first + count > values_.size()) {
        throw Error(ErrorCode::insufficient_data, "slice out of range for series '" + entity_id_ + "'");
    }
    return FrequencySeries(entity_id_, date_at(first),
                           std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(first),
                                               values_.begin() + static_cast<std::ptrdiff_t>(first + count)));
}

double windowed_mean(std::span<const double> values, std::size_t window, std::size_t end_index) {
    if (window == 0) throw Error(ErrorCode::invalid_argument, "fame window must be >= 1");
    if (end_index >= values.size() || end_index + 1 < window) {
        throw Error(ErrorCode::insufficient_data,
                    "window of " + std::to_string(window) + " days ending at index " + std::to_string(end_index) +
                        " exceeds available history");
    }
    const auto first = values.begin() + static_cast<std::ptrdiff_t>(end_index + 1 - window);
    const double sum = std::accumulate(first, first + static_cast<std::ptrdiff_t>(window), 0.0);
    return sum / static_cast<double>(window);
}

std::vector<double> rolling_mean(std::span<const double> values, std::size_t window) {
    if (window == 0) throw Error(ErrorCode::invalid_argument, "fame window must be >= 1");
    if (values.empty()) throw Error(ErrorCode::insufficient_data, "empty series");
    if (window > values.size()) {
        throw Error(ErrorCode::insufficient_data, "window exceeds series length");
    }
    std::vector<double> out;
    out.reserve(values.size() - window + 1);
    for (std::size_t end = window - 1; end < values.size(); ++end) {
        out.push_back(windowed_mean(values, window, end));
    }
    return out;
}

FameValue fame(const FrequencySeries& series, std::size_t window, std::size_t end_index) {
    return {std::log1p(windowed_mean(series.values(), window, end_index)), window};
}

FameSeries fame_series(const FrequencySeries& series, std::size_t window) {
    FameSeries out{window, window - 1, rolling_mean(series.values(), window)};
    for (double& v : out.values) v = std::log1p(v);
    return out;
}

FameValue peak_fame(const FrequencySeries& series, std::size_t first, std::size_t last, std::size_t window) {
    if (window == 0) throw Error(ErrorCode::invalid_argument, "fame window must be >= 1");
    if (first > last || last >= series.size()) {
        throw Error(ErrorCode::invalid_argument, "peak-fame period outside series");
    }
    if (last - first + 1 < window) {
        throw Error(ErrorCode::insufficient_data, "peak-fame period shorter than window");
    }
    double best = 0.0;
    for (std::size_t end = first + window - 1; end <= last; ++end) {
        best = std::max(best, windowed_mean(series.values(), window, end));
    }
    return {std::log1p(best), window};
}

FameValue peak_fame(const FrequencySeries& series, Date from, Date to, std::size_t window) {
    const auto first = series.index_of(from);
    const auto last = series.index_of(to);
    if (!first || !last) throw Error(ErrorCode::invalid_argument, "peak-fame period outside series");
    return peak_fame(series, *first, *last, window);
}

GroupDefinition::GroupDefinition(std::string name, std::vector<std::string> members)
    : name_(std::move(name)), members_(std::move(members)) {
    if (members_.empty()) throw Error(ErrorCode::invalid_argument, "group '" + name_ + "' has no members");
    std::set<std::string> seen;
    for (const auto& m : members_) {
        if (!seen.insert(m).second) {
            throw Error(ErrorCode::invalid_argument, "group '" + name_ + "' lists member '" + m + "' twice");
        }
    }
}

bool GroupDefinition::contains(const std::string& entity_id) const {
    return std::find(members_.begin(), members_.end(), entity_id) != members_.end();
}

const char* to_string(GroupFameKind kind) {
    switch (kind) {
    case GroupFameKind::total: return "total";
    case GroupFameKind::average: return "average";
    case GroupFameKind::maximum: return "maximum";
    }
    return "total";
}

GroupFameKind parse_group_fame_kind(const std::string& text) {
    if (text == "total") return GroupFameKind::total;
    if (text == "average") return GroupFameKind::average;
    if (text == "maximum" || text == "max") return GroupFameKind::maximum;
    throw Error(ErrorCode::invalid_argument, "unknown group fame kind '" + text + "'");
}

std::vector<const FrequencySeries*> member_series(const GroupDefinition& group, const SeriesMap& series_map) {
    std::vector<const FrequencySeries*> out;
    out.reserve(group.size());
    for (const auto& id : group.members()) {
        auto it = series_map.find(id);
        if (it == series_map.end()) {
            throw Error(ErrorCode::missing_member, "group '" + group.name() + "' member '" + id + "' has no series");
        }
        out.push_back(&it->second);
    }
    return out;
}

GroupFameSeries group_fame_series(const GroupDefinition& group, const SeriesMap& series_map,
                                  GroupFameKind kind, std::size_t window) {
    const auto members = member_series(group, series_map);
    const FrequencySeries& ref = *members.front();
    for (const auto* s : members) {
        if (s->start_date() != ref.start_date() || s->size() != ref.size()) {
            throw Error(ErrorCode::invalid_argument,
                        "member '" + s->entity_id() + "' does not share the group's date range");
        }
    }

    std::vector<std::vector<double>> means;
    means.reserve(members.size());
    for (const auto* s : members) means.push_back(rolling_mean(s->values(), window));

    GroupFameSeries out{kind, window, window - 1, {}};
    const std::size_t steps = means.front().size();
    out.values.reserve(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        double sum = 0.0;
        double max = 0.0;
        for (const auto& m : means) {
            sum += m[k];
            max = std::max(max, m[k]);
        }
        double agg = sum;
        if (kind == GroupFameKind::average) agg = sum / static_cast<double>(means.size());
        if (kind == GroupFameKind::maximum) agg = max;
        out.values.push_back(std::log1p(agg));
    }
    return out;
}

std::vector<EquivalencePoint> fame_equivalence(const GroupDefinition& group,
                                               const std::map<std::string, double>& per_entity_fame) {
    if (group.size() < 2) throw Error(ErrorCode::insufficient_data, "fame equivalence needs >= 2 members");

    std::vector<std::pair<double, std::string>> ranked;
    ranked.reserve(group.size());
    for (const auto& id : group.members()) {
        auto it = per_entity_fame.find(id);
        if (it == per_entity_fame.end()) {
            throw Error(ErrorCode::missing_member, "no fame value for member '" + id + "'");
        }
        if (!std::isfinite(it->second) || it->second < 0.0) {
            throw Error(ErrorCode::invalid_argument, "negative fame for member '" + id + "'");
        }
        ranked.emplace_back(it->second, id);
    }
    std::sort(ranked.begin(), ranked.end());

    const std::size_t n = ranked.size();
    const double total = std::accumulate(ranked.begin(), ranked.end(), 0.0,
                                         [](double acc, const auto& p) { return acc + p.first; });
    if (total <= 0.0) throw Error(ErrorCode::degenerate_sample, "all fame values are zero");

    std::vector<EquivalencePoint> curve;
    curve.reserve(101);
    for (int alpha = 0; alpha <= 100; ++alpha) {
        if (alpha == 100) {
            curve.push_back({100.0, 100.0});
            break;
        }
        // Accumulated fame of the bottom alpha% (ascending order).
        const double a = alpha * static_cast<double>(n) / 100.0;
        const auto whole = static_cast<std::size_t>(a);
        double bottom = 0.0;
        for (std::size_t i = 0; i < whole; ++i) bottom += ranked[i].first;
        if (whole < n) bottom += (a - static_cast<double>(whole)) * ranked[whole].first;

        // Smallest top share reaching the same mass (descending order).
        double b = 0.0;
        if (bottom > 0.0) {
            double cum = 0.0;
            b = static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j) {
                const double v = ranked[n - 1 - j].first;
                if (cum + v >= bottom) {
                    b = static_cast<double>(j) + (bottom - cum) / v;
                    break;
                }
                cum += v;
            }
        }
        curve.push_back({static_cast<double>(alpha), 100.0 * b / static_cast<double>(n)});
    }
    return curve;
}

} // namespace newsfame
