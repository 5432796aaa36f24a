#include "analytics/quality.hpp"

#include <set>
#include <sstream>

#include "model/timezone.hpp"

namespace schoolsense::analytics {

using model::CivilDate;
using model::Millis;

namespace {

std::string fmt_pct(double v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%.2f%%", v);
  return buf;
}

}  // namespace

Result<QualityReport> availability_report(const store::RawLog& raw,
                                          const model::Topology& topo, Millis from, Millis to,
                                          const QualityConfig& cfg) {
  if (from >= to) return Error{Errc::invalid_argument, "empty period"};
  QualityReport report;
  std::map<model::ResourceKind, KindQualityRow> kinds;
  std::map<model::ResourceKind, std::set<std::string>> kind_pos;
  std::map<model::ResourceKind, std::pair<std::int64_t, std::int64_t>> kind_days;  // outage, total
  std::map<model::ResourceKind, std::pair<std::int64_t, std::int64_t>> kind_points;

  bool any_sensor = false;
  for (const auto& site : topo.sites) {
    auto tz = model::TimeZone::load(site.timezone);
    if (!tz.ok()) return tz.error();

    SiteQualityRow row;
    row.site_id = site.site_id;
    row.sensors = int(site.resources.size());
    row.start = site.incorporated;
    std::set<std::string> pos;

    CivilDate first_day = tz.value().local_date(from);
    if (site.incorporated > first_day) first_day = site.incorporated;
    CivilDate last_day = tz.value().local_date(to - 1);

    std::int64_t outage_days = 0, total_days = 0;
    std::int64_t flagged = 0, points = 0;
    for (const auto& res : site.resources) {
      any_sensor = true;
      pos.insert(res.room_id ? *res.room_id : res.device);
      kind_pos[res.kind].insert(res.room_id ? *res.room_id : res.device);
      kinds[res.kind].sensors += 1;

      // bucket stored readings by site-local day
      Millis scan0 = tz.value().local_midnight_utc(first_day);
      auto got = raw.get_raw(res.resource_id, scan0, to);
      std::vector<model::Reading> readings =
          got.ok() ? got.take() : std::vector<model::Reading>{};
      std::set<CivilDate> days_with_data;
      for (const auto& r : readings) days_with_data.insert(tz.value().local_date(r.timestamp));

      std::int64_t res_days = 0, res_outage = 0;
      for (CivilDate d = first_day; d <= last_day; d = model::civil_add_days(d, 1)) {
        ++res_days;
        bool present = days_with_data.count(d) != 0;
        if (!present) ++res_outage;
        report.matrix.push_back({res.resource_id, d, present});
      }
      total_days += res_days;
      outage_days += res_outage;
      kind_days[res.kind].first += res_outage;
      kind_days[res.kind].second += res_days;

      if (!readings.empty()) {
        Series s = series_from_readings(readings);
        auto screened = detect_outliers(s, cfg.outliers);
        if (screened.ok()) {
          auto n_flags = std::int64_t(screened.value().flags.size());
          flagged += n_flags;
          points += std::int64_t(s.points.size());
          kind_points[res.kind].first += n_flags;
          kind_points[res.kind].second += std::int64_t(s.points.size());
        }
      }
    }
    row.pos = int(pos.size());
    row.outage_pct = total_days > 0 ? 100.0 * double(outage_days) / double(total_days) : 0.0;
    row.outlier_pct = points > 0 ? 100.0 * double(flagged) / double(points) : 0.0;
    report.sites.push_back(row);
  }
  if (!any_sensor) return Error{Errc::no_data, "topology has no resources"};

  for (auto& [kind, row] : kinds) {
    row.kind = kind;
    row.pos = int(kind_pos[kind].size());
    auto [outage, total] = kind_days[kind];
    auto [flagged, points] = kind_points[kind];
    row.inactive_pct = total > 0 ? 100.0 * double(outage) / double(total) : 0.0;
    row.outlier_pct = points > 0 ? 100.0 * double(flagged) / double(points) : 0.0;
    report.kinds.push_back(row);
  }
  return report;
}

std::string quality_report_csv(const QualityReport& r) {
  std::ostringstream os;
  os << "Site,POS,Sensors,Start time,Outages,Outliers\n";
  for (const auto& row : r.sites)
    os << row.site_id << ',' << row.pos << ',' << row.sensors << ','
       << model::format_date(row.start) << ',' << fmt_pct(row.outage_pct) << ','
       << fmt_pct(row.outlier_pct) << '\n';
  os << "\nName,POS,Sensors,Inactive,Outlier\n";
  for (const auto& row : r.kinds)
    os << model::to_string(row.kind) << ',' << row.pos << ',' << row.sensors << ','
       << fmt_pct(row.inactive_pct) << ',' << fmt_pct(row.outlier_pct) << '\n';
  return os.str();
}

std::string availability_matrix_csv(const QualityReport& r) {
  std::ostringstream os;
  os << "resource,day,state\n";
  for (const auto& cell : r.matrix)
    os << cell.resource_id << ',' << model::format_date(cell.day) << ','
       << (cell.present ? "present" : "missing") << '\n';
  return os.str();
}

}  // namespace schoolsense::analytics
