#include "model/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace schoolsense::model {

namespace {

namespace chr = std::chrono;

chr::year_month_day ymd_of(const CivilDate& d) {
  return chr::year_month_day{chr::year{d.year}, chr::month{d.month}, chr::day{d.day}};
}

CivilDate to_civil(chr::year_month_day ymd) {
  return CivilDate{int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day())};
}

std::int64_t days_from_epoch(const CivilDate& d) {
  return chr::sys_days(ymd_of(d)).time_since_epoch().count();
}

CivilDate civil_from_days(std::int64_t days) {
  return to_civil(chr::year_month_day{chr::sys_days{chr::days{days}}});
}

// floor division towards -inf, for pre-1970 safety
std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if (a % b != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

const char* to_string(Granularity g) {
  switch (g) {
    case Granularity::FiveMin: return "5min";
    case Granularity::Hour: return "hour";
    case Granularity::Day: return "day";
    case Granularity::Month: return "month";
    case Granularity::Year: return "year";
  }
  return "?";
}

std::optional<Granularity> granularity_from_string(std::string_view s) {
  if (s == "5min" || s == "five_min" || s == "5m") return Granularity::FiveMin;
  if (s == "hour" || s == "1h") return Granularity::Hour;
  if (s == "day" || s == "1d") return Granularity::Day;
  if (s == "month") return Granularity::Month;
  if (s == "year") return Granularity::Year;
  return std::nullopt;
}

CivilDate civil_from_ms(Millis ts) {
  return civil_from_days(floor_div(ts, kMillisPerDay));
}

CivilDateTime civil_datetime_from_ms(Millis ts) {
  std::int64_t days = floor_div(ts, kMillisPerDay);
  std::int64_t rem = ts - days * kMillisPerDay;
  CivilDateTime out;
  out.date = civil_from_days(days);
  out.hour = int(rem / kMillisPerHour);
  rem %= kMillisPerHour;
  out.minute = int(rem / kMillisPerMinute);
  rem %= kMillisPerMinute;
  out.second = int(rem / kMillisPerSecond);
  out.millisecond = int(rem % kMillisPerSecond);
  return out;
}

Millis ms_from_civil(const CivilDate& d) {
  return days_from_epoch(d) * kMillisPerDay;
}

CivilDate civil_add_days(const CivilDate& d, int days) {
  return civil_from_days(days_from_epoch(d) + days);
}

CivilDate civil_add_months(const CivilDate& d, int months) {
  int m0 = d.year * 12 + int(d.month) - 1 + months;
  int y = m0 >= 0 ? m0 / 12 : -((-m0 + 11) / 12);
  int m = m0 - y * 12;
  return CivilDate{y, unsigned(m + 1), 1};
}

int weekday(const CivilDate& d) {
  chr::weekday wd{chr::sys_days(ymd_of(d))};
  return int(wd.c_encoding());  // 0 = Sunday
}

bool is_weekend(const CivilDate& d) {
  int wd = weekday(d);
  return wd == 0 || wd == 6;
}

IntervalKey align(Millis ts, Granularity g) {
  switch (g) {
    case Granularity::FiveMin:
      return {g, floor_div(ts, kFiveMinutes) * kFiveMinutes};
    case Granularity::Hour:
      return {g, floor_div(ts, kMillisPerHour) * kMillisPerHour};
    case Granularity::Day:
      return {g, floor_div(ts, kMillisPerDay) * kMillisPerDay};
    case Granularity::Month: {
      CivilDate d = civil_from_ms(ts);
      return {g, ms_from_civil(CivilDate{d.year, d.month, 1})};
    }
    case Granularity::Year: {
      CivilDate d = civil_from_ms(ts);
      return {g, ms_from_civil(CivilDate{d.year, 1, 1})};
    }
  }
  return {g, 0};
}

Millis next_start(const IntervalKey& k) {
  switch (k.granularity) {
    case Granularity::FiveMin: return k.start + kFiveMinutes;
    case Granularity::Hour: return k.start + kMillisPerHour;
    case Granularity::Day: return k.start + kMillisPerDay;
    case Granularity::Month: {
      CivilDate d = civil_from_ms(k.start);
      return ms_from_civil(civil_add_months(d, 1));
    }
    case Granularity::Year: {
      CivilDate d = civil_from_ms(k.start);
      return ms_from_civil(CivilDate{d.year + 1, 1, 1});
    }
  }
  return k.start;
}

Millis width_ms(const IntervalKey& k) {
  return next_start(k) - k.start;
}

std::string format_iso8601(Millis ts) {
  CivilDateTime c = civil_datetime_from_ms(ts);
  char buf[40];
  if (c.millisecond != 0) {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", c.date.year,
                  c.date.month, c.date.day, c.hour, c.minute, c.second, c.millisecond);
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", c.date.year, c.date.month,
                  c.date.day, c.hour, c.minute, c.second);
  }
  return buf;
}

std::string format_date(const CivilDate& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", d.year, d.month, d.day);
  return buf;
}

namespace {

bool parse_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  auto res = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return res.ec == std::errc() && res.ptr == s.data() + pos + len;
}

}  // namespace

std::optional<CivilDate> parse_date(std::string_view s) {
  int y, mo, da;
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!parse_int(s, 0, 4, y) || !parse_int(s, 5, 2, mo) || !parse_int(s, 8, 2, da))
    return std::nullopt;
  if (mo < 1 || mo > 12 || da < 1 || da > 31) return std::nullopt;
  return CivilDate{y, unsigned(mo), unsigned(da)};
}

std::optional<Millis> parse_time(std::string_view s) {
  if (s.empty()) return std::nullopt;
  // plain integer => epoch milliseconds
  bool digits = s[0] == '-' || (s[0] >= '0' && s[0] <= '9');
  if (digits && s.find_first_not_of("0123456789", 1) == std::string_view::npos) {
    Millis v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size()) return v;
    return std::nullopt;
  }
  auto date = parse_date(s);
  if (!date) return std::nullopt;
  Millis base = ms_from_civil(*date);
  if (s.size() == 10) return base;
  if (s.size() < 16 || (s[10] != 'T' && s[10] != ' ')) return std::nullopt;
  int h, mi, sec = 0, ms = 0;
  if (!parse_int(s, 11, 2, h) || s[13] != ':' || !parse_int(s, 14, 2, mi)) return std::nullopt;
  std::size_t pos = 16;
  if (pos < s.size() && s[pos] == ':') {
    if (!parse_int(s, pos + 1, 2, sec)) return std::nullopt;
    pos += 3;
  }
  if (pos < s.size() && s[pos] == '.') {
    if (!parse_int(s, pos + 1, 3, ms)) return std::nullopt;
    pos += 4;
  }
  if (pos < s.size() && s[pos] != 'Z') return std::nullopt;  // only UTC accepted
  return base + h * kMillisPerHour + mi * kMillisPerMinute + sec * kMillisPerSecond + ms;
}

}  // namespace schoolsense::model
