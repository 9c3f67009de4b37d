#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "tickvar/core/error.hpp"

namespace tickvar {

// UTC epoch milliseconds. Wall-clock data timestamps only; latency
// measurements use std::chrono::steady_clock instead.
using TimestampMs = std::int64_t;

inline constexpr TimestampMs kMsPerSecond = 1000;
inline constexpr TimestampMs kMsPerMinute = 60 * kMsPerSecond;
inline constexpr TimestampMs kMsPerHour = 60 * kMsPerMinute;
inline constexpr TimestampMs kMsPerDay = 24 * kMsPerHour;

constexpr TimestampMs floor_to(TimestampMs t, TimestampMs unit) {
    TimestampMs q = t / unit;
    if (t % unit != 0 && t < 0) --q;
    return q * unit;
}

constexpr TimestampMs minute_of(TimestampMs t) { return floor_to(t, kMsPerMinute); }
constexpr TimestampMs day_of(TimestampMs t) { return floor_to(t, kMsPerDay); }

struct Date {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;

    friend bool operator==(const Date&, const Date&) = default;
    friend auto operator<=>(const Date&, const Date&) = default;
};

inline bool valid_date(const Date& d) {
    using namespace std::chrono;
    return year_month_day{year{d.year}, month{d.month}, day{d.day}}.ok();
}

inline TimestampMs to_timestamp(const Date& d) {
    using namespace std::chrono;
    const sys_days days{year{d.year} / month{d.month} / day{d.day}};
    return static_cast<TimestampMs>(days.time_since_epoch().count()) * kMsPerDay;
}

inline Date date_of(TimestampMs t) {
    using namespace std::chrono;
    const sys_days days{std::chrono::days{day_of(t) / kMsPerDay}};
    const year_month_day ymd{days};
    return Date{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day())};
}

// Partition directory naming, e.g. 2023.07.25
inline std::string format_partition_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d.%02u.%02u", d.year, d.month, d.day);
    return buf;
}

inline Date parse_partition_date(std::string_view s) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    const std::string str(s);
    if (std::sscanf(str.c_str(), "%4d.%2u.%2u%c", &y, &m, &d, &tail) != 3)
        throw ParseError("bad partition date '" + str + "'");
    Date out{y, m, d};
    if (!valid_date(out)) throw ParseError("bad partition date '" + str + "'");
    return out;
}

// ISO-8601 date (YYYY-MM-DD) as used on the command line.
inline Date parse_iso_date(std::string_view s) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    const std::string str(s);
    if (std::sscanf(str.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
        throw ParseError("bad date '" + str + "', expected YYYY-MM-DD");
    Date out{y, m, d};
    if (!valid_date(out)) throw ParseError("bad date '" + str + "'");
    return out;
}

// 2023-07-25T13:04:05.123Z (milliseconds optional, trailing Z required)
inline std::string format_iso8601(TimestampMs t) {
    const Date d = date_of(t);
    const TimestampMs in_day = t - day_of(t);
    const auto h = in_day / kMsPerHour;
    const auto mi = (in_day % kMsPerHour) / kMsPerMinute;
    const auto s = (in_day % kMsPerMinute) / kMsPerSecond;
    const auto ms = in_day % kMsPerSecond;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", d.year, d.month,
                  d.day, static_cast<long long>(h), static_cast<long long>(mi),
                  static_cast<long long>(s), static_cast<long long>(ms));
    return buf;
}

inline TimestampMs parse_iso8601(std::string_view text) {
    const std::string s(text);
    int y = 0;
    unsigned mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    int consumed = 0;
    if (std::sscanf(s.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u%n", &y, &mo, &d, &h, &mi, &sec, &consumed) != 6)
        throw ParseError("bad timestamp '" + s + "'");
    Date date{y, mo, d};
    if (!valid_date(date) || h > 23 || mi > 59 || sec > 59)
        throw ParseError("bad timestamp '" + s + "'");
    std::size_t pos = static_cast<std::size_t>(consumed);
    TimestampMs millis = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        int digits = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            if (digits < 3) millis = millis * 10 + (s[pos] - '0');
            ++digits;
            ++pos;
        }
        if (digits == 0) throw ParseError("bad timestamp '" + s + "'");
        for (int i = digits; i < 3; ++i) millis *= 10;
    }
    if (pos + 1 != s.size() || s[pos] != 'Z')
        throw ParseError("timestamp '" + s + "' must be UTC with trailing Z");
    return to_timestamp(date) + h * kMsPerHour + mi * kMsPerMinute + sec * kMsPerSecond + millis;
}

} // namespace tickvar
