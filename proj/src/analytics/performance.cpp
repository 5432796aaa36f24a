#include "analytics/performance.hpp"

#include <algorithm>
#include <sstream>

namespace schoolsense::analytics {

using model::CivilDate;
using model::Millis;

namespace {

Series room_series(const store::RawLog& raw, const model::SiteTopology& site,
                   const std::string& room_id, Millis from, Millis to) {
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

}  // namespace

Result<WeekendReport> weekend_performance(const store::RawLog& raw,
                                          const model::Topology& topo,
                                          const std::string& site_id, Millis from, Millis to,
                                          const WeekendConfig& cfg) {
  const model::SiteTopology* site = topo.find_site(site_id);
  if (!site) return Error{Errc::unknown_resource, "unknown site: " + site_id};
  auto tz = model::TimeZone::load(site->timezone);
  if (!tz.ok()) return tz.error();

  WeekendReport report;
  for (const auto& room : site->rooms) {
    Series measured = room_series(raw, *site, room.room_id, from, to);
    if (measured.points.empty()) continue;
    auto filled = fill_gaps(measured, cfg.gap_fill);
    if (!filled.ok()) continue;
    const Series& s = filled.value();

    RoomPerformance perf;
    perf.room_id = room.room_id;
    double rise_sum = 0.0;

    CivilDate first_day = tz.value().local_date(from);
    CivilDate last_day = tz.value().local_date(to - 1);
    for (CivilDate d = first_day; d <= last_day; d = model::civil_add_days(d, 1)) {
      if (!model::is_weekend(d)) continue;
      Millis w0 = tz.value().from_local(d, cfg.window_start_minutes);
      Millis w1 = tz.value().from_local(d, cfg.window_end_minutes);
      auto lo = std::lower_bound(s.points.begin(), s.points.end(), w0,
                                 [](const SeriesPoint& p, Millis t) { return p.ts < t; });
      auto hi = std::lower_bound(s.points.begin(), s.points.end(), w1,
                                 [](const SeriesPoint& p, Millis t) { return p.ts < t; });
      if (lo == hi) continue;

      double vmin = lo->value, vmax = lo->value;
      for (auto it = lo; it != hi; ++it) {
        vmin = std::min(vmin, it->value);
        vmax = std::max(vmax, it->value);
      }
      double rise = vmax - vmin;

      double peak_rate = 0.0;
      for (auto j = lo; j != hi; ++j) {
        for (auto i = j;; --i) {
          if (j->ts - i->ts > cfg.rate_window_ms) break;
          peak_rate = std::max(peak_rate, j->value - i->value);
          if (i == lo) break;
        }
      }

      report.days.push_back({room.room_id, d, rise, peak_rate});
      rise_sum += rise;
      perf.max_rise_c = std::max(perf.max_rise_c, rise);
      perf.peak_rate_c = std::max(perf.peak_rate_c, peak_rate);
      ++perf.weekend_days;
    }
    if (perf.weekend_days == 0) continue;
    perf.mean_rise_c = rise_sum / double(perf.weekend_days);
    perf.flagged = perf.mean_rise_c > cfg.flag_threshold_c;
    report.rooms.push_back(perf);
  }
  if (report.rooms.empty())
    return Error{Errc::no_weekend_data, "no weekend data for site " + site_id};
  std::stable_sort(report.rooms.begin(), report.rooms.end(),
                   [](const RoomPerformance& a, const RoomPerformance& b) {
                     return a.mean_rise_c > b.mean_rise_c;
                   });
  return report;
}

std::string weekend_report_csv(const WeekendReport& r) {
  std::ostringstream os;
  os << "room,weekend_days,mean_rise_c,max_rise_c,peak_rate_c_per_h,flagged\n";
  for (const auto& room : r.rooms) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.3f,%.3f,%.3f", room.mean_rise_c, room.max_rise_c,
                  room.peak_rate_c);
    os << room.room_id << ',' << room.weekend_days << ',' << buf << ','
       << (room.flagged ? "yes" : "no") << '\n';
  }
  return os.str();
}

std::vector<ThermalEvent> detect_events(const Series& s, const EventConfig& cfg) {
  std::vector<ThermalEvent> events;
  if (cfg.threshold_c <= 0 || cfg.span_ms <= 0 || s.points.size() < 2) return events;
  const auto& pts = s.points;

  struct Detection {
    std::size_t i, j;
    double delta;
    double rate;
  };
  std::vector<Detection> hits;
  for (std::size_t j = 1; j < pts.size(); ++j) {
    for (std::size_t i = j; i-- > 0 && pts[j].ts - pts[i].ts <= cfg.span_ms;) {
      double delta = pts[j].value - pts[i].value;
      if (std::abs(delta) >= cfg.threshold_c) {
        double dt = double(pts[j].ts - pts[i].ts);
        hits.push_back({i, j, delta, std::abs(delta) / dt});
      }
    }
  }
  if (hits.empty()) return events;

  // merge overlapping same-direction windows, keep the steepest
  std::sort(hits.begin(), hits.end(),
            [&](const Detection& a, const Detection& b) { return pts[a.i].ts < pts[b.i].ts; });
  std::size_t cluster_end = 0;
  Detection best = hits.front();
  double best_mag = std::abs(best.delta);
  auto flush = [&]() {
    events.push_back({pts[best.j].ts,
                      best.delta < 0 ? EventDirection::Drop : EventDirection::Rise, best_mag});
  };
  cluster_end = best.j;
  for (std::size_t k = 1; k < hits.size(); ++k) {
    const Detection& h = hits[k];
    bool same_dir = (h.delta < 0) == (best.delta < 0);
    if (same_dir && h.i <= cluster_end) {
      cluster_end = std::max(cluster_end, h.j);
      best_mag = std::max(best_mag, std::abs(h.delta));
      if (h.rate > best.rate) best = h;
    } else {
      flush();
      best = h;
      best_mag = std::abs(h.delta);
      cluster_end = h.j;
    }
  }
  flush();
  return events;
}

}  // namespace schoolsense::analytics
