#include "newsfame/io.hpp"

#include "newsfame/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace newsfame {

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw Error(ErrorCode::invalid_argument, "cannot format number");
    return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (begin != end && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || begin == end) {
        throw Error(ErrorCode::parse_error, "invalid number '" + std::string(text) + "'");
    }
    return value;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        fields.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return fields;
}

[[noreturn]] void fail_row(const std::string& source, std::size_t line_no, const std::string& what) {
    throw Error(ErrorCode::parse_error, source + ": line " + std::to_string(line_no) + ": " + what);
}

} // namespace

SeriesMap read_series_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::map<std::string, std::map<Date, double>> rows;

    while (std::getline(in, line)) {
        ++line_no;
        const auto view = trim(line);
        if (view.empty()) continue;
        const auto fields = split_fields(view);
        if (!header_seen) {
            header_seen = true;
            if (fields.size() != 3 || fields[0] != "entity_id" || fields[1] != "date" || fields[2] != "frequency") {
                fail_row(source, line_no, "expected header 'entity_id,date,frequency'");
            }
            continue;
        }
        if (fields.size() != 3) fail_row(source, line_no, "expected 3 fields");
        if (fields[0].empty()) fail_row(source, line_no, "empty entity_id");

        Date date;
        double freq = 0.0;
        try {
            date = parse_date(fields[1]);
            freq = parse_double(fields[2]);
        } catch (const Error& e) {
            fail_row(source, line_no, e.what());
        }
        if (!std::isfinite(freq) || freq < 0.0) {
            fail_row(source, line_no, "frequency must be a non-negative number, got '" + std::string(fields[2]) + "'");
        }
        auto& per_entity = rows[std::string(fields[0])];
        if (!per_entity.emplace(date, freq).second) {
            fail_row(source, line_no, "duplicate row for entity '" + std::string(fields[0]) + "' on " +
                                          std::string(fields[1]));
        }
    }
    if (!header_seen) throw Error(ErrorCode::parse_error, source + ": missing header");
    if (rows.empty()) throw Error(ErrorCode::insufficient_data, source + ": no data rows");

    Date first = rows.begin()->second.begin()->first;
    Date last = first;
    for (const auto& [id, days] : rows) {
        first = std::min(first, days.begin()->first);
        last = std::max(last, days.rbegin()->first);
    }
    const auto length = static_cast<std::size_t>(days_between(first, last) + 1);

    SeriesMap out;
    for (const auto& [id, days] : rows) {
        std::vector<double> values(length, 0.0);
        for (const auto& [date, freq] : days) values[static_cast<std::size_t>(days_between(first, date))] = freq;
        out.emplace(id, FrequencySeries(id, first, std::move(values)));
    }
    return out;
}

SeriesMap read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path.string() + "'");
    return read_series_csv(in, path.string());
}

void write_series_csv(std::ostream& out, const SeriesMap& series) {
    out << "entity_id,date,frequency\n";
    for (const auto& [id, s] : series) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            out << id << ',' << format_date(s.date_at(i)) << ',' << format_double(s[i]) << '\n';
        }
    }
}

void write_series_csv(const std::filesystem::path& path, const SeriesMap& series) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path.string() + "'");
    write_series_csv(out, series);
}

SeriesMap align_to_common_range(const SeriesMap& series) {
    if (series.empty()) return {};
    Date first = series.begin()->second.start_date();
    Date last = series.begin()->second.end_date();
    for (const auto& [id, s] : series) {
        first = std::min(first, s.start_date());
        last = std::max(last, s.end_date());
    }
    const auto length = static_cast<std::size_t>(days_between(first, last) + 1);
    SeriesMap out;
    for (const auto& [id, s] : series) {
        std::vector<double> values(length, 0.0);
        const auto offset = static_cast<std::size_t>(days_between(first, s.start_date()));
        std::copy(s.values().begin(), s.values().end(), values.begin() + static_cast<std::ptrdiff_t>(offset));
        out.emplace(id, FrequencySeries(id, first, std::move(values)));
    }
    return out;
}

GroupDefinition read_group_json(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("group file: ") + e.what());
    }
    if (!j.is_object() || !j.contains("name") || !j.contains("members") || !j["name"].is_string() ||
        !j["members"].is_array()) {
        throw Error(ErrorCode::parse_error, "group file must be {\"name\": string, \"members\": [string]}");
    }
    std::vector<std::string> members;
    for (const auto& m : j["members"]) {
        if (!m.is_string()) throw Error(ErrorCode::parse_error, "group members must be strings");
        members.push_back(m.get<std::string>());
    }
    return GroupDefinition(j["name"].get<std::string>(), std::move(members));
}

GroupDefinition read_group_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path.string() + "'");
    return read_group_json(in);
}

void write_group_json(std::ostream& out, const GroupDefinition& group) {
    nlohmann::json j{{"name", group.name()}, {"members", group.members()}};
    out << j.dump(2) << '\n';
}

GroupDefinition group_of_all(const SeriesMap& series, std::string name) {
    std::vector<std::string> members;
    members.reserve(series.size());
    for (const auto& [id, s] : series) members.push_back(id);
    return GroupDefinition(std::move(name), std::move(members));
}

} // namespace newsfame
