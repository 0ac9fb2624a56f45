#pragma once

#include "newsfame/series.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace newsfame {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Reads `entity_id,date,frequency` rows. Days missing inside the overall date
/// range are zero-filled and every entity is aligned to that common range.
/// Validation errors name the offending line.
SeriesMap read_series_csv(std::istream& in, const std::string& source = "<input>");
SeriesMap read_series_csv(const std::filesystem::path& path);

void write_series_csv(std::ostream& out, const SeriesMap& series);
void write_series_csv(const std::filesystem::path& path, const SeriesMap& series);

/// Zero-pads every series to the union of their date ranges.
SeriesMap align_to_common_range(const SeriesMap& series);

GroupDefinition read_group_json(std::istream& in);
GroupDefinition read_group_json(const std::filesystem::path& path);
void write_group_json(std::ostream& out, const GroupDefinition& group);

/// Group containing every entity of the map, in id order.
GroupDefinition group_of_all(const SeriesMap& series, std::string name = "all");

} // namespace newsfame
