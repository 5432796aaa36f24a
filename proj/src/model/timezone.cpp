#include "model/timezone.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>

namespace schoolsense::model {

namespace {

std::int64_t rd_be64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
  return std::int64_t(v);
}

std::int32_t rd_be32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | p[i];
  return std::int32_t(v);
}

bool valid_zone_name(const std::string& name) {
  if (name.empty() || name[0] == '/' || name.find("..") != std::string::npos) return false;
  return name.find_first_not_of(
             "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789/_-+") ==
         std::string::npos;
}

// "UTC+02:00", "UTC-05", "UTC+0130"
bool parse_fixed_offset(const std::string& name, std::int32_t& out_sec) {
  if (name == "UTC" || name == "Z" || name == "Etc/UTC") {
    out_sec = 0;
    return true;
  }
  if (name.rfind("UTC", 0) != 0 || name.size() < 5) return false;
  int sign = name[3] == '+' ? 1 : name[3] == '-' ? -1 : 0;
  if (sign == 0) return false;
  std::string rest = name.substr(4);
  int h = 0, m = 0;
  if (rest.size() == 2) {
    h = std::atoi(rest.c_str());
  } else if (rest.size() == 5 && rest[2] == ':') {
    h = std::atoi(rest.substr(0, 2).c_str());
    m = std::atoi(rest.substr(3, 2).c_str());
  } else if (rest.size() == 4) {
    h = std::atoi(rest.substr(0, 2).c_str());
    m = std::atoi(rest.substr(2, 2).c_str());
  } else {
    return false;
  }
  if (h > 18 || m > 59) return false;
  out_sec = sign * (h * 3600 + m * 60);
  return true;
}

// Parses the offset part of a POSIX TZ name, e.g. "-2" in "EET-2".
// POSIX sign convention is west-positive, we store seconds east.
bool parse_posix_offset(const char*& p, std::int32_t& out_sec) {
  int sign = 1;
  if (*p == '-') {
    sign = -1;
    ++p;
  } else if (*p == '+') {
    ++p;
  }
  if (*p < '0' || *p > '9') return false;
  int h = 0;
  while (*p >= '0' && *p <= '9') h = h * 10 + (*p++ - '0');
  int m = 0, s = 0;
  if (*p == ':') {
    ++p;
    while (*p >= '0' && *p <= '9') m = m * 10 + (*p++ - '0');
    if (*p == ':') {
      ++p;
      while (*p >= '0' && *p <= '9') s = s * 10 + (*p++ - '0');
    }
  }
  out_sec = -sign * (h * 3600 + m * 60 + s);
  return true;
}

void skip_designation(const char*& p) {
  if (*p == '<') {
    while (*p && *p != '>') ++p;
    if (*p == '>') ++p;
  } else {
    while ((*p >= 'A' && *p <= 'Z') || (*p >= 'a' && *p <= 'z')) ++p;
  }
}

bool parse_m_rule(const char*& p, int& month, int& week, int& wday, int& time_sec) {
  if (*p != 'M') return false;
  ++p;
  month = std::atoi(p);
  while (*p && *p != '.') ++p;
  if (*p++ != '.') return false;
  week = std::atoi(p);
  while (*p && *p != '.') ++p;
  if (*p++ != '.') return false;
  wday = std::atoi(p);
  while (*p >= '0' && *p <= '9') ++p;
  time_sec = 2 * 3600;
  if (*p == '/') {
    ++p;
    int sign = 1;
    if (*p == '-') {
      sign = -1;
      ++p;
    }
    int h = std::atoi(p);
    while (*p >= '0' && *p <= '9') ++p;
    int m = 0, s = 0;
    if (*p == ':') {
      ++p;
      m = std::atoi(p);
      while (*p >= '0' && *p <= '9') ++p;
      if (*p == ':') {
        ++p;
        s = std::atoi(p);
        while (*p >= '0' && *p <= '9') ++p;
      }
    }
    time_sec = sign * (h * 3600 + m * 60 + s);
  }
  return true;
}

// Local instant (seconds past local midnight on the rule day) of rule
// M<month>.<week>.<wday> in a given year, as days since epoch + seconds.
std::int64_t rule_day(int year, int month, int week, int wday) {
  CivilDate first{year, unsigned(month), 1};
  int first_wd = weekday(first);
  int shift = (wday - first_wd + 7) % 7;
  int day = 1 + shift + (week - 1) * 7;
  // week 5 means "last"; pull back while out of month
  auto days_in = [&](int m) {
    CivilDate next = civil_add_months(CivilDate{year, unsigned(m), 1}, 1);
    return int((ms_from_civil(next) - ms_from_civil(CivilDate{year, unsigned(m), 1})) /
               kMillisPerDay);
  };
  while (day > days_in(month)) day -= 7;
  return ms_from_civil(CivilDate{year, unsigned(month), unsigned(day)}) / kMillisPerSecond;
}

}  // namespace

TimeZone TimeZone::utc() {
  TimeZone tz;
  return tz;
}

std::int32_t TimeZone::rule_offset_sec(Millis utc) const {
  const PosixRule& r = *footer_;
  if (!r.has_dst) return r.std_offset_sec;
  std::int64_t t = utc / kMillisPerSecond;
  int year = civil_from_ms(utc).year;
  // Start time is interpreted in standard local time, end time in DST local
  // time (the wall clock prevailing before each transition).
  auto start_utc = [&](int y) {
    return rule_day(y, r.start_month, r.start_week, r.start_weekday) + r.start_time_sec -
           r.std_offset_sec;
  };
  auto end_utc = [&](int y) {
    return rule_day(y, r.end_month, r.end_week, r.end_weekday) + r.end_time_sec -
           r.dst_offset_sec;
  };
  for (int y = year + 1; y >= year - 1; --y) {
    std::int64_t s = start_utc(y), e = end_utc(y);
    if (s <= e) {  // northern hemisphere style
      if (y > year) continue;
      if (t >= s && t < e) return r.dst_offset_sec;
      if (t >= e) return r.std_offset_sec;
      if (y < year) return r.std_offset_sec;
    } else {  // southern hemisphere: DST wraps over new year
      if (t >= s) return r.dst_offset_sec;
      if (t >= e) return r.std_offset_sec;
      if (y < year) return r.dst_offset_sec;
    }
  }
  return r.std_offset_sec;
}

std::int64_t TimeZone::offset_ms_at(Millis utc) const {
  if (fixed_) return std::int64_t(fixed_offset_sec_) * 1000;
  if (transitions_.empty() || utc < transitions_.front().at_utc) {
    if (!transitions_.empty()) return std::int64_t(first_offset_sec_) * 1000;
    return footer_ ? std::int64_t(rule_offset_sec(utc)) * 1000
                   : std::int64_t(first_offset_sec_) * 1000;
  }
  // Past the last stored transition the footer rule takes over.
  if (utc >= transitions_.back().at_utc && footer_)
    return std::int64_t(rule_offset_sec(utc)) * 1000;
  auto it = std::upper_bound(
      transitions_.begin(), transitions_.end(), utc,
      [](Millis t, const Transition& tr) { return t < tr.at_utc; });
  --it;
  return std::int64_t(it->offset_sec) * 1000;
}

CivilDateTime TimeZone::to_local(Millis utc) const {
  return civil_datetime_from_ms(utc + offset_ms_at(utc));
}

CivilDate TimeZone::local_date(Millis utc) const {
  return civil_from_ms(utc + offset_ms_at(utc));
}

Millis TimeZone::from_local(const CivilDate& d, int minutes_of_day) const {
  Millis wall = ms_from_civil(d) + Millis(minutes_of_day) * kMillisPerMinute;
  Millis guess = wall - offset_ms_at(wall);
  return wall - offset_ms_at(guess);
}

Result<TimeZone> TimeZone::load(const std::string& name) {
  TimeZone tz;
  tz.name_ = name;
  if (parse_fixed_offset(name, tz.fixed_offset_sec_)) return tz;
  if (!valid_zone_name(name))
    return Error{Errc::invalid_config, "invalid timezone name: " + name};

  const char* tzdir = std::getenv("TZDIR");
  std::string path = std::string(tzdir && *tzdir ? tzdir : "/usr/share/zoneinfo") + "/" + name;
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return Error{Errc::invalid_config, "unknown timezone (no zoneinfo entry): " + name};
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
  std::size_t n = raw.size();
  if (n < 44 || std::memcmp(p, "TZif", 4) != 0)
    return Error{Errc::invalid_config, "not a TZif file: " + path};
  char version = char(p[4]);

  auto header_counts = [&](std::size_t off, std::uint32_t out[6]) {
    for (int i = 0; i < 6; ++i) out[i] = std::uint32_t(rd_be32(p + off + 20 + 4 * i));
  };
  std::uint32_t c[6];
  header_counts(0, c);
  // v1 body size with 32-bit times
  auto body_size = [&](std::uint32_t cnt[6], int tsz) {
    return std::size_t(cnt[3]) * tsz + cnt[3] + cnt[4] * 6 + cnt[5] + cnt[2] * (tsz + 4) +
           cnt[1] + cnt[0];
  };
  std::size_t off = 44 + body_size(c, 4);
  bool use64 = version >= '2' && off + 44 <= n && std::memcmp(p + off, "TZif", 4) == 0;
  int tsz = 4;
  std::size_t data = 44;
  if (use64) {
    header_counts(off, c);
    data = off + 44;
    tsz = 8;
  }
  std::uint32_t timecnt = c[3], typecnt = c[4], charcnt = c[5], leapcnt = c[2];
  if (typecnt == 0) return Error{Errc::invalid_config, "TZif with no types: " + path};
  if (data + body_size(c, tsz) > n)
    return Error{Errc::invalid_config, "truncated TZif: " + path};

  std::vector<std::int64_t> times(timecnt);
  for (std::uint32_t i = 0; i < timecnt; ++i)
    times[i] = use64 ? rd_be64(p + data + 8 * i) : rd_be32(p + data + 4 * i);
  std::size_t q = data + timecnt * tsz;
  std::vector<std::uint8_t> idx(timecnt);
  for (std::uint32_t i = 0; i < timecnt; ++i) idx[i] = p[q + i];
  q += timecnt;
  struct TType {
    std::int32_t off;
    bool dst;
  };
  std::vector<TType> types(typecnt);
  for (std::uint32_t i = 0; i < typecnt; ++i) {
    types[i].off = rd_be32(p + q + 6 * i);
    types[i].dst = p[q + 6 * i + 4] != 0;
  }
  q += typecnt * 6 + charcnt + leapcnt * (tsz + 4) + c[1] + c[0];

  tz.fixed_ = false;
  tz.transitions_.reserve(timecnt);
  for (std::uint32_t i = 0; i < timecnt; ++i) {
    if (idx[i] >= typecnt) continue;
    tz.transitions_.push_back({times[i] * kMillisPerSecond, types[idx[i]].off});
  }
  // offset before the first transition: first non-DST type by convention
  tz.first_offset_sec_ = types[0].off;
  for (const auto& t : types)
    if (!t.dst) {
      tz.first_offset_sec_ = t.off;
      break;
    }

  // footer: "\n<TZ string>\n"
  if (use64 && q < n && p[q] == '\n') {
    std::size_t end = raw.find('\n', q + 1);
    if (end != std::string::npos && end > q + 1) {
      std::string rule = raw.substr(q + 1, end - q - 1);
      const char* rp = rule.c_str();
      PosixRule pr;
      skip_designation(rp);
      if (parse_posix_offset(rp, pr.std_offset_sec)) {
        if (*rp && *rp != ',') {
          skip_designation(rp);
          pr.dst_offset_sec = pr.std_offset_sec + 3600;
          if (*rp && *rp != ',') parse_posix_offset(rp, pr.dst_offset_sec);
          if (*rp == ',') {
            ++rp;
            if (parse_m_rule(rp, pr.start_month, pr.start_week, pr.start_weekday,
                             pr.start_time_sec) &&
                *rp == ',') {
              ++rp;
              if (parse_m_rule(rp, pr.end_month, pr.end_week, pr.end_weekday,
                               pr.end_time_sec))
                pr.has_dst = true;
            }
          }
        }
        tz.footer_ = std::make_shared<PosixRule>(pr);
      }
    }
  }
  if (tz.transitions_.empty() && !tz.footer_) {
    tz.fixed_ = true;
    tz.fixed_offset_sec_ = tz.first_offset_sec_;
  }
  return tz;
}

}  // namespace schoolsense::model
