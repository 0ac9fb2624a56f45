#pragma once

#include "newsfame/date.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace newsfame {

/// One entity's daily reference counts over contiguous calendar days.
/// Values are non-negative and may be fractional.
class FrequencySeries {
public:
    FrequencySeries(std::string entity_id, Date start_date, std::vector<double> values);

    const std::string& entity_id() const noexcept { return entity_id_; }
    Date start_date() const noexcept { return start_date_; }
    Date end_date() const noexcept { return add_days(start_date_, static_cast<long>(values_.size()) - 1); }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    Date date_at(std::size_t index) const { return add_days(start_date_, static_cast<long>(index)); }
    std::optional<std::size_t> index_of(Date date) const;

    /// Contiguous sub-range [first, first + count) as a new series.
    FrequencySeries slice(std::size_t first, std::size_t count) const;

private:
    std::string entity_id_;
    Date start_date_;
    std::vector<double> values_;
};

using SeriesMap = std::map<std::string, FrequencySeries>;

struct FameValue {
    double value = 0.0;
    std::size_t window = 1;
};

/// Sliding-window fame; values[k] belongs to the window ending at first_index + k.
struct FameSeries {
    std::size_t window = 1;
    std::size_t first_index = 0;
    std::vector<double> values;
};

inline constexpr std::size_t kDefaultPeakWindow = 5;

/// Mean raw frequency over the `window` days ending at `end_index` (inclusive).
double windowed_mean(std::span<const double> values, std::size_t window, std::size_t end_index);

/// Raw windowed means for every index with a full window; element k ends at window - 1 + k.
std::vector<double> rolling_mean(std::span<const double> values, std::size_t window);

/// ln(1 + mean frequency over the window ending at end_index).
FameValue fame(const FrequencySeries& series, std::size_t window, std::size_t end_index);

FameSeries fame_series(const FrequencySeries& series, std::size_t window);

/// Maximum windowed fame over all full windows inside [first, last].
FameValue peak_fame(const FrequencySeries& series, std::size_t first, std::size_t last,
                    std::size_t window = kDefaultPeakWindow);
FameValue peak_fame(const FrequencySeries& series, Date from, Date to,
                    std::size_t window = kDefaultPeakWindow);

class GroupDefinition {
public:
    GroupDefinition(std::string name, std::vector<std::string> members);

    const std::string& name() const noexcept { return name_; }
    /// Members in insertion order.
    const std::vector<std::string>& members() const noexcept { return members_; }
    std::size_t size() const noexcept { return members_.size(); }
    bool contains(const std::string& entity_id) const;

private:
    std::string name_;
    std::vector<std::string> members_;
};

enum class GroupFameKind { total, average, maximum };

const char* to_string(GroupFameKind kind);
GroupFameKind parse_group_fame_kind(const std::string& text);

struct GroupFameSeries {
    GroupFameKind kind = GroupFameKind::total;
    std::size_t window = 1;
    std::size_t first_index = 0;
    std::vector<double> values;
};

/// Aggregates the members' raw windowed means (sum, mean or max) per step and
/// then applies ln(1 + x). All members must share start date and length.
GroupFameSeries group_fame_series(const GroupDefinition& group, const SeriesMap& series_map,
                                  GroupFameKind kind, std::size_t window);

/// Returns the series of every member, failing with missing_member on the first absent one.
std::vector<const FrequencySeries*> member_series(const GroupDefinition& group, const SeriesMap& series_map);

struct EquivalencePoint {
    double alpha_pct = 0.0;
    double beta_pct = 0.0;
};

/// Bottom-vs-top fame equivalence curve on the integer percent grid 0..100.
/// For each alpha, beta is the share of top entities whose accumulated fame
/// equals that of the bottom alpha share; fractional entities are interpolated
/// linearly in fame mass. Ties are ordered by entity id.
std::vector<EquivalencePoint> fame_equivalence(const GroupDefinition& group,
                                               const std::map<std::string, double>& per_entity_fame);

} // namespace newsfame
