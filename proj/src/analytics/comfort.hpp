#pragma once

#include <map>
#include <string>
#include <vector>

#include "analytics/series.hpp"
#include "common/result.hpp"
#include "model/timezone.hpp"
#include "model/topology.hpp"
#include "store/raw_log.hpp"

namespace schoolsense::analytics {

// Adaptive comfort band for one day: comfort temperature as a linear
// function of the prevailing mean outdoor temperature, with an acceptability
// band around it and an upper-limit extension under elevated air speed.
struct ComfortBand {
  double comfort_c = 0.0;
  double lower_c = 0.0;
  double upper_c = 0.0;
  bool applicable = false;  // prevailing mean within the model domain
};

struct ComfortConfig {
  double band_delta_c = 3.5;     // 80% acceptability; 2.5 for 90%
  double domain_min_c = 10.0;    // model domain for the prevailing mean
  double domain_max_c = 33.5;
  int prevailing_days = 7;       // days feeding the prevailing mean
};

ComfortBand comfort_band(double prevailing_mean_c, double wind_ms,
                         const ComfortConfig& cfg = {});

// Mean of the previous `prevailing_days` daily means when all are present,
// otherwise the same-day mean.
std::optional<double> prevailing_mean(const std::map<model::CivilDate, double>& daily_means,
                                      const model::CivilDate& day, int prevailing_days);

struct DailyComfort {
  std::string site_id;
  std::string room_id;
  model::CivilDate day;
  double score = 0.0;
  int hours_evaluated = 0;
  int hours_comfortable = 0;
};

// Score for one room and one local day: the fraction of school hours whose
// mean indoor temperature lies inside the band. Hours without indoor data,
// or days with an inapplicable band, are excluded from the denominator.
Result<DailyComfort> daily_comfort(const Series& indoor,
                                   const std::map<model::CivilDate, double>& outdoor_daily_mean,
                                   const std::map<model::CivilDate, double>& wind_daily_mean,
                                   const model::CivilDate& day, const model::TimeZone& tz,
                                   const model::SchoolHours& hours,
                                   const ComfortConfig& cfg = {});

struct SiteComfortReport {
  std::string site_id;
  std::vector<DailyComfort> days;  // room x day matrix, row-major by room
  double site_mean = 0.0;
  int defined_scores = 0;
};

Result<SiteComfortReport> site_comfort(const store::RawLog& raw, const model::Topology& topo,
                                       const std::string& site_id, model::Millis from,
                                       model::Millis to, const ComfortConfig& cfg = {});

std::string site_comfort_csv(const SiteComfortReport& r);

// Daily mean values keyed by site-local date.
std::map<model::CivilDate, double> daily_means(const Series& s, const model::TimeZone& tz);

}  // namespace schoolsense::analytics
