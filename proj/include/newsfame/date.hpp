#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace newsfame {

using Date = std::chrono::sys_days;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Throws Error(parse_error).
Date parse_date(std::string_view text);

std::string format_date(Date date);

inline Date add_days(Date date, long n) { return date + std::chrono::days{n}; }

inline long days_between(Date from, Date to) { return (to - from).count(); }

} // namespace newsfame
