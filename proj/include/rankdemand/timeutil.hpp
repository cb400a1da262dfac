#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace rankdemand {

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

/// Parses `YYYY-MM-DDTHH:MM:SSZ` (UTC only).
std::optional<Timestamp> parse_timestamp(std::string_view text);
/// Parses `YYYY-MM-DD`.
std::optional<Date> parse_date(std::string_view text);

std::string format_timestamp(Timestamp t);
std::string format_date(Date d);

/// Whole days from `release` to `t`, floored; negative when `t` precedes release.
long long days_between(Date release, Timestamp t);

} // namespace rankdemand
