#include "analytics/run.hpp"

#include <sstream>

#include <json.hpp>

#include "analytics/comfort.hpp"
#include "analytics/performance.hpp"
#include "analytics/quality.hpp"
#include "analytics/series.hpp"

namespace schoolsense::analytics {

using nlohmann::json;

namespace {

Result<std::pair<model::Millis, model::Millis>> parse_range(const json& opts) {
  if (!opts.contains("from") || !opts.contains("to"))
    return Error{Errc::invalid_argument, "options need from and to"};
  auto get = [&](const char* k) -> std::optional<model::Millis> {
    if (opts[k].is_number_integer()) return opts[k].get<std::int64_t>();
    if (opts[k].is_string()) return model::parse_time(opts[k].get<std::string>());
    return std::nullopt;
  };
  auto from = get("from");
  auto to = get("to");
  if (!from || !to || *from >= *to)
    return Error{Errc::invalid_argument, "bad from/to range"};
  return std::pair<model::Millis, model::Millis>{*from, *to};
}

json flags_json(const std::vector<OutlierFlag>& flags) {
  json arr = json::array();
  for (const auto& f : flags)
    arr.push_back({{"ts", f.ts},
                   {"time", model::format_iso8601(f.ts)},
                   {"original", f.original},
                   {"replacement", f.replacement},
                   {"fence", f.fence == FenceSide::Lower ? "lower" : "upper"}});
  return arr;
}

Result<std::string> analyze_outliers(Platform& p, const json& opts, const std::string& format) {
  auto range = parse_range(opts);
  if (!range.ok()) return range.error();
  std::string resource = opts.value("resource", "");
  if (resource.empty()) return Error{Errc::invalid_argument, "outliers needs a resource"};
  auto readings = p.raw().get_raw(resource, range.value().first, range.value().second);
  if (!readings.ok()) return readings.error();
  OutlierConfig cfg;
  if (opts.contains("window_hours"))
    cfg.window_ms = model::Millis(opts["window_hours"].get<double>() * 3600.0 * 1000.0);
  auto screened = detect_outliers(series_from_readings(readings.value()), cfg);
  if (!screened.ok()) return screened.error();
  if (format == "csv") {
    std::ostringstream os;
    os << "resource,ts,time,original,replacement,fence\n";
    for (const auto& f : screened.value().flags)
      os << resource << ',' << f.ts << ',' << model::format_iso8601(f.ts) << ',' << f.original
         << ',' << f.replacement << ',' << (f.fence == FenceSide::Lower ? "lower" : "upper")
         << '\n';
    return os.str();
  }
  json out;
  out["resource"] = resource;
  out["points"] = screened.value().clean.points.size();
  out["flags"] = flags_json(screened.value().flags);
  return out.dump(2);
}

json quality_json(const QualityReport& r) {
  json out;
  out["sites"] = json::array();
  for (const auto& row : r.sites)
    out["sites"].push_back({{"site", row.site_id},
                            {"pos", row.pos},
                            {"sensors", row.sensors},
                            {"start_time", model::format_date(row.start)},
                            {"outages_pct", row.outage_pct},
                            {"outliers_pct", row.outlier_pct}});
  out["kinds"] = json::array();
  for (const auto& row : r.kinds)
    out["kinds"].push_back({{"name", model::to_string(row.kind)},
                            {"pos", row.pos},
                            {"sensors", row.sensors},
                            {"inactive_pct", row.inactive_pct},
                            {"outlier_pct", row.outlier_pct}});
  return out;
}

Result<std::string> analyze_availability(Platform& p, const json& opts,
                                         const std::string& format, bool matrix_only) {
  auto range = parse_range(opts);
  if (!range.ok()) return range.error();
  QualityConfig cfg;
  if (opts.contains("window_hours"))
    cfg.outliers.window_ms = model::Millis(opts["window_hours"].get<double>() * 3600.0 * 1000.0);
  auto report =
      availability_report(p.raw(), p.topology(), range.value().first, range.value().second, cfg);
  if (!report.ok()) return report.error();
  if (matrix_only) {
    if (format == "csv") return availability_matrix_csv(report.value());
    json out = json::array();
    for (const auto& cell : report.value().matrix)
      out.push_back({{"resource", cell.resource_id},
                     {"day", model::format_date(cell.day)},
                     {"state", cell.present ? "present" : "missing"}});
    return out.dump(2);
  }
  if (format == "csv") return quality_report_csv(report.value());
  return quality_json(report.value()).dump(2);
}

Result<std::string> analyze_comfort(Platform& p, const json& opts, const std::string& format) {
  auto range = parse_range(opts);
  if (!range.ok()) return range.error();
  ComfortConfig cfg;
  if (opts.contains("band_delta_c")) cfg.band_delta_c = opts["band_delta_c"].get<double>();
  std::vector<std::string> sites;
  if (opts.contains("site"))
    sites.push_back(opts["site"].get<std::string>());
  else
    for (const auto& s : p.topology().sites) sites.push_back(s.site_id);

  json out;
  out["sites"] = json::array();
  std::string csv;
  for (const auto& site : sites) {
    auto report = site_comfort(p.raw(), p.topology(), site, range.value().first,
                               range.value().second, cfg);
    if (!report.ok()) {
      if (opts.contains("site")) return report.error();
      continue;  // sites without evaluable data are absent from the fleet view
    }
    if (format == "csv") {
      csv += site_comfort_csv(report.value());
    } else {
      json js;
      js["site"] = site;
      js["mean"] = report.value().site_mean;
      js["defined_scores"] = report.value().defined_scores;
      js["days"] = json::array();
      for (const auto& d : report.value().days)
        js["days"].push_back({{"room", d.room_id},
                              {"day", model::format_date(d.day)},
                              {"score", d.score},
                              {"hours_evaluated", d.hours_evaluated},
                              {"hours_comfortable", d.hours_comfortable}});
      out["sites"].push_back(js);
    }
  }
  if (format == "csv") {
    if (csv.empty()) return Error{Errc::no_data, "no evaluable comfort data"};
    return csv;
  }
  if (out["sites"].empty()) return Error{Errc::no_data, "no evaluable comfort data"};
  return out.dump(2);
}

Result<std::string> analyze_performance(Platform& p, const json& opts,
                                        const std::string& format) {
  auto range = parse_range(opts);
  if (!range.ok()) return range.error();
  std::string site = opts.value("site", "");
  if (site.empty()) return Error{Errc::invalid_argument, "performance needs a site"};
  WeekendConfig cfg;
  if (opts.contains("flag_threshold_c"))
    cfg.flag_threshold_c = opts["flag_threshold_c"].get<double>();
  auto report =
      weekend_performance(p.raw(), p.topology(), site, range.value().first, range.value().second, cfg);
  if (!report.ok()) return report.error();
  if (format == "csv") return weekend_report_csv(report.value());
  json out;
  out["site"] = site;
  out["rooms"] = json::array();
  for (const auto& room : report.value().rooms)
    out["rooms"].push_back({{"room", room.room_id},
                            {"weekend_days", room.weekend_days},
                            {"mean_rise_c", room.mean_rise_c},
                            {"max_rise_c", room.max_rise_c},
                            {"peak_rate_c_per_h", room.peak_rate_c},
                            {"flagged", room.flagged}});
  return out.dump(2);
}

Result<std::string> analyze_events(Platform& p, const json& opts, const std::string& format) {
  auto range = parse_range(opts);
  if (!range.ok()) return range.error();
  std::string resource = opts.value("resource", "");
  if (resource.empty()) return Error{Errc::invalid_argument, "events needs a resource"};
  auto readings = p.raw().get_raw(resource, range.value().first, range.value().second);
  if (!readings.ok()) return readings.error();
  EventConfig cfg;
  if (opts.contains("threshold_c")) cfg.threshold_c = opts["threshold_c"].get<double>();
  if (opts.contains("span_minutes"))
    cfg.span_ms = model::Millis(opts["span_minutes"].get<double>() * 60.0 * 1000.0);
  auto events = detect_events(resample_five_min(series_from_readings(readings.value())), cfg);
  if (format == "csv") {
    std::ostringstream os;
    os << "resource,ts,time,direction,magnitude_c\n";
    for (const auto& e : events)
      os << resource << ',' << e.ts << ',' << model::format_iso8601(e.ts) << ','
         << (e.direction == EventDirection::Drop ? "drop" : "rise") << ',' << e.magnitude_c
         << '\n';
    return os.str();
  }
  json out = json::array();
  for (const auto& e : events)
    out.push_back({{"ts", e.ts},
                   {"time", model::format_iso8601(e.ts)},
                   {"direction", e.direction == EventDirection::Drop ? "drop" : "rise"},
                   {"magnitude_c", e.magnitude_c}});
  return out.dump(2);
}

}  // namespace

Result<std::string> run_analysis(Platform& platform, const std::string& kind,
                                 const std::string& options_json, const std::string& format) {
  json opts = json::parse(options_json.empty() ? "{}" : options_json, nullptr, false);
  if (opts.is_discarded())
    return Error{Errc::invalid_argument, "analysis options are not valid JSON"};
  if (format != "json" && format != "csv")
    return Error{Errc::invalid_argument, "format must be json or csv"};
  if (kind == "outliers") return analyze_outliers(platform, opts, format);
  if (kind == "availability") return analyze_availability(platform, opts, format, false);
  if (kind == "matrix") return analyze_availability(platform, opts, format, true);
  if (kind == "comfort") return analyze_comfort(platform, opts, format);
  if (kind == "performance") return analyze_performance(platform, opts, format);
  if (kind == "events") return analyze_events(platform, opts, format);
  return Error{Errc::invalid_argument, "unknown analysis kind: " + kind};
}

}  // namespace schoolsense::analytics
