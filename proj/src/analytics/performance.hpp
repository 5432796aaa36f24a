#pragma once

#include <string>
#include <vector>

#include "analytics/series.hpp"
#include "common/result.hpp"
#include "model/timezone.hpp"
#include "model/topology.hpp"
#include "store/raw_log.hpp"

namespace schoolsense::analytics {

struct WeekendConfig {
  int window_start_minutes = 6 * 60;   // 06:00 local
  int window_end_minutes = 18 * 60;    // 18:00 local
  double flag_threshold_c = 8.0;       // mean daily rise above this flags the room
  model::Millis rate_window_ms = model::kMillisPerHour;
  GapFillConfig gap_fill;
};

struct WeekendDayMetric {
  std::string room_id;
  model::CivilDate day;
  double rise_c = 0.0;       // max - min of gap-filled temperature in window
  double peak_rate_c = 0.0;  // max increase over any 1h sliding window
};

struct RoomPerformance {
  std::string room_id;
  int weekend_days = 0;
  double mean_rise_c = 0.0;
  double max_rise_c = 0.0;
  double peak_rate_c = 0.0;
  bool flagged = false;
};

struct WeekendReport {
  std::vector<WeekendDayMetric> days;
  std::vector<RoomPerformance> rooms;  // ranked by mean rise, worst first
};

// Thermal response of classrooms on weekends, when no school activity masks
// the envelope behaviour.
Result<WeekendReport> weekend_performance(const store::RawLog& raw,
                                          const model::Topology& topo,
                                          const std::string& site_id, model::Millis from,
                                          model::Millis to, const WeekendConfig& cfg = {});

std::string weekend_report_csv(const WeekendReport& r);

enum class EventDirection { Drop, Rise };

struct ThermalEvent {
  model::Millis ts = 0;  // end of the steepest detection window
  EventDirection direction = EventDirection::Drop;
  double magnitude_c = 0.0;
};

struct EventConfig {
  double threshold_c = 2.0;
  model::Millis span_ms = 15 * model::kMillisPerMinute;
};

// Emits an event wherever the temperature change over any window up to
// `span` reaches the threshold; overlapping same-direction detections merge
// into one event anchored at the steepest window.
std::vector<ThermalEvent> detect_events(const Series& s, const EventConfig& cfg = {});

}  // namespace schoolsense::analytics
