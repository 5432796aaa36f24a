#include "analytics/comfort.hpp"

#include <algorithm>
#include <sstream>

namespace schoolsense::analytics {

using model::CivilDate;
using model::Millis;
using model::TimeZone;

ComfortBand comfort_band(double prevailing_mean_c, double wind_ms, const ComfortConfig& cfg) {
  ComfortBand band;
  band.comfort_c = 0.31 * prevailing_mean_c + 17.8;
  band.lower_c = band.comfort_c - cfg.band_delta_c;
  band.upper_c = band.comfort_c + cfg.band_delta_c;
  if (wind_ms >= 1.2)
    band.upper_c += 2.2;
  else if (wind_ms >= 0.9)
    band.upper_c += 1.8;
  else if (wind_ms >= 0.6)
    band.upper_c += 1.2;
  band.applicable =
      prevailing_mean_c >= cfg.domain_min_c && prevailing_mean_c <= cfg.domain_max_c;
  return band;
}

std::optional<double> prevailing_mean(const std::map<CivilDate, double>& daily_means,
                                      const CivilDate& day, int prevailing_days) {
  double sum = 0.0;
  int have = 0;
  for (int back = 1; back <= prevailing_days; ++back) {
    auto it = daily_means.find(model::civil_add_days(day, -back));
    if (it == daily_means.end()) break;
    sum += it->second;
    ++have;
  }
  if (have == prevailing_days) return sum / double(prevailing_days);
  auto same = daily_means.find(day);
  if (same != daily_means.end()) return same->second;
  return std::nullopt;
}

std::map<CivilDate, double> daily_means(const Series& s, const TimeZone& tz) {
  std::map<CivilDate, std::pair<double, int>> acc;
  for (const auto& p : s.points) {
    auto& slot = acc[tz.local_date(p.ts)];
    slot.first += p.value;
    slot.second += 1;
  }
  std::map<CivilDate, double> out;
  for (const auto& [d, sv] : acc) out[d] = sv.first / double(sv.second);
  return out;
}

Result<DailyComfort> daily_comfort(const Series& indoor,
                                   const std::map<CivilDate, double>& outdoor_daily_mean,
                                   const std::map<CivilDate, double>& wind_daily_mean,
                                   const CivilDate& day, const TimeZone& tz,
                                   const model::SchoolHours& hours, const ComfortConfig& cfg) {
  DailyComfort out;
  out.day = day;

  auto pm = prevailing_mean(outdoor_daily_mean, day, cfg.prevailing_days);
  if (!pm)
    return Error{Errc::no_evaluable_hours, "no outdoor temperature for " + model::format_date(day)};
  double wind = 0.0;
  if (auto it = wind_daily_mean.find(day); it != wind_daily_mean.end()) wind = it->second;
  ComfortBand band = comfort_band(*pm, wind, cfg);
  if (!band.applicable)
    return Error{Errc::no_evaluable_hours,
                 "adaptive band not applicable on " + model::format_date(day)};

  for (int m = hours.start_minutes; m + 60 <= hours.end_minutes; m += 60) {
    Millis h0 = tz.from_local(day, m);
    Millis h1 = tz.from_local(day, m + 60);
    double sum = 0.0;
    int n = 0;
    auto it = std::lower_bound(indoor.points.begin(), indoor.points.end(), h0,
                               [](const SeriesPoint& p, Millis t) { return p.ts < t; });
    for (; it != indoor.points.end() && it->ts < h1; ++it) {
      sum += it->value;
      ++n;
    }
    if (n == 0) continue;  // hour without indoor data
    double mean_indoor = sum / double(n);
    ++out.hours_evaluated;
    if (mean_indoor >= band.lower_c && mean_indoor <= band.upper_c) ++out.hours_comfortable;
  }
  if (out.hours_evaluated == 0)
    return Error{Errc::no_evaluable_hours, "no indoor data in school hours on " +
                                               model::format_date(day)};
  out.score = double(out.hours_comfortable) / double(out.hours_evaluated);
  return out;
}

namespace {

Series room_temperature_series(const store::RawLog& raw, const model::SiteTopology& site,
                               const std::string& room_id, Millis from, Millis to) {
  // Slot-wise mean across the room's temperature sensors.
  std::map<Millis, std::pair<double, int>> merged;
  for (const auto& res : site.resources) {
    if (!res.room_id || *res.room_id != room_id || res.sensor != "temperature") continue;
    auto got = raw.get_raw(res.resource_id, from, to);
    if (!got.ok()) continue;
    Series s = resample_five_min(series_from_readings(got.value()));
    for (const auto& p : s.points) {
      auto& slot = merged[p.ts];
      slot.first += p.value;
      slot.second += 1;
    }
  }
  Series out;
  out.resource_id = room_id;
  for (const auto& [ts, sv] : merged)
    out.points.push_back({ts, sv.first / double(sv.second), false});
  return out;
}

Series site_weather_series(const store::RawLog& raw, const model::SiteTopology& site,
                           const std::string& sensor, Millis from, Millis to) {
  for (const auto& res : site.resources) {
    if (res.room_id || res.sensor != sensor) continue;
    auto got = raw.get_raw(res.resource_id, from, to);
    if (!got.ok()) continue;
    return series_from_readings(got.value());
  }
  return {};
}

}  // namespace

Result<SiteComfortReport> site_comfort(const store::RawLog& raw, const model::Topology& topo,
                                       const std::string& site_id, Millis from, Millis to,
                                       const ComfortConfig& cfg) {
  const model::SiteTopology* site = topo.find_site(site_id);
  if (!site) return Error{Errc::unknown_resource, "unknown site: " + site_id};
  if (from >= to) return Error{Errc::invalid_argument, "empty period"};
  auto tz = TimeZone::load(site->timezone);
  if (!tz.ok()) return tz.error();

  // Pull outdoor context once per site. Prevailing means need history before
  // the period, so scan further back than `from`.
  Millis history = Millis(cfg.prevailing_days + 1) * model::kMillisPerDay;
  Series outdoor = site_weather_series(raw, *site, "temperature", from - history, to);
  Series wind = site_weather_series(raw, *site, "wind_speed", from - history, to);
  auto outdoor_means = daily_means(outdoor, tz.value());
  auto wind_means = daily_means(wind, tz.value());

  SiteComfortReport report;
  report.site_id = site_id;
  double score_sum = 0.0;

  CivilDate first_day = tz.value().local_date(from);
  CivilDate last_day = tz.value().local_date(to - 1);
  for (const auto& room : site->rooms) {
    Series indoor = room_temperature_series(raw, *site, room.room_id, from, to);
    if (indoor.points.empty()) continue;
    for (CivilDate d = first_day; d <= last_day; d = model::civil_add_days(d, 1)) {
      auto dc = daily_comfort(indoor, outdoor_means, wind_means, d, tz.value(),
                              site->school_hours, cfg);
      if (!dc.ok()) continue;  // undefined scores are simply absent
      DailyComfort row = dc.take();
      row.site_id = site_id;
      row.room_id = room.room_id;
      report.days.push_back(row);
      score_sum += row.score;
      ++report.defined_scores;
    }
  }
  if (report.defined_scores == 0)
    return Error{Errc::no_data, "no evaluable room-days for site " + site_id};
  report.site_mean = score_sum / double(report.defined_scores);
  return report;
}

std::string site_comfort_csv(const SiteComfortReport& r) {
  std::ostringstream os;
  os << "site,room,day,score,hours_evaluated,hours_comfortable\n";
  for (const auto& d : r.days) {
    char score[16];
    std::snprintf(score, sizeof(score), "%.4f", d.score);
    os << d.site_id << ',' << d.room_id << ',' << model::format_date(d.day) << ',' << score
       << ',' << d.hours_evaluated << ',' << d.hours_comfortable << '\n';
  }
  return os.str();
}

}  // namespace schoolsense::analytics
