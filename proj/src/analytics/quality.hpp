#pragma once

#include <map>
#include <string>
#include <vector>

#include "analytics/series.hpp"
#include "common/result.hpp"
#include "model/topology.hpp"
#include "store/raw_log.hpp"

namespace schoolsense::analytics {

// One site row: {Site, POS, Sensors, Start time, Outages, Outliers}.
struct SiteQualityRow {
  std::string site_id;
  int pos = 0;      // distinct points of sensing
  int sensors = 0;  // resources
  model::CivilDate start;  // incorporation date
  double outage_pct = 0.0;
  double outlier_pct = 0.0;
};

// Per sensor kind: {Name, POS, Sensors, Inactive, Outlier}.
struct KindQualityRow {
  model::ResourceKind kind = model::ResourceKind::Environmental;
  int pos = 0;
  int sensors = 0;
  double inactive_pct = 0.0;
  double outlier_pct = 0.0;
};

// One cell of the availability matrix: sensor x site-local day.
struct AvailabilityCell {
  model::ResourceId resource_id;
  model::CivilDate day;
  bool present = false;
};

struct QualityReport {
  std::vector<SiteQualityRow> sites;
  std::vector<KindQualityRow> kinds;
  std::vector<AvailabilityCell> matrix;
};

struct QualityConfig {
  OutlierConfig outliers;
};

// A sensor-day (site-local calendar day) counts as an outage-day when zero
// readings were stored for it. Days are evaluated from the later of the
// site's incorporation date and the period start, through the period end.
Result<QualityReport> availability_report(const store::RawLog& raw,
                                          const model::Topology& topo, model::Millis from,
                                          model::Millis to, const QualityConfig& cfg = {});

std::string quality_report_csv(const QualityReport& r);
std::string availability_matrix_csv(const QualityReport& r);

}  // namespace schoolsense::analytics
