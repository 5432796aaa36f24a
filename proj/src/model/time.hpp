#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace schoolsense::model {

// All engine-side instants are UTC epoch milliseconds.
using Millis = std::int64_t;

constexpr Millis kMillisPerSecond = 1000;
constexpr Millis kMillisPerMinute = 60 * kMillisPerSecond;
constexpr Millis kMillisPerHour = 60 * kMillisPerMinute;
constexpr Millis kMillisPerDay = 24 * kMillisPerHour;
constexpr Millis kFiveMinutes = 5 * kMillisPerMinute;

enum class Granularity { FiveMin = 0, Hour, Day, Month, Year };

constexpr std::array<Granularity, 5> kAllGranularities = {
    Granularity::FiveMin, Granularity::Hour, Granularity::Day, Granularity::Month,
    Granularity::Year};

const char* to_string(Granularity g);
std::optional<Granularity> granularity_from_string(std::string_view s);

// Aligned tumbling-window interval. FIVE_MIN/HOUR/DAY are fixed width;
// MONTH/YEAR are UTC calendar intervals of variable width.
struct IntervalKey {
  Granularity granularity = Granularity::FiveMin;
  Millis start = 0;

  auto operator<=>(const IntervalKey&) const = default;
};

struct CivilDate {
  int year = 1970;
  unsigned month = 1;  // 1..12
  unsigned day = 1;    // 1..31

  auto operator<=>(const CivilDate&) const = default;
};

struct CivilDateTime {
  CivilDate date;
  int hour = 0;
  int minute = 0;
  int second = 0;
  int millisecond = 0;
};

// UTC civil conversions.
CivilDate civil_from_ms(Millis ts);
CivilDateTime civil_datetime_from_ms(Millis ts);
Millis ms_from_civil(const CivilDate& d);  // midnight UTC
CivilDate civil_add_days(const CivilDate& d, int days);
CivilDate civil_add_months(const CivilDate& d, int months);  // clamps day 1
int weekday(const CivilDate& d);  // 0 = Sunday .. 6 = Saturday
bool is_weekend(const CivilDate& d);

IntervalKey align(Millis ts, Granularity g);
Millis next_start(const IntervalKey& k);
Millis width_ms(const IntervalKey& k);

std::string format_iso8601(Millis ts);
std::string format_date(const CivilDate& d);
// Accepts ISO-8601 UTC ("2017-09-30T10:02:17Z", date-only) or raw epoch ms.
std::optional<Millis> parse_time(std::string_view s);
std::optional<CivilDate> parse_date(std::string_view s);

}  // namespace schoolsense::model
