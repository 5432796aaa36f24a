#pragma once

#include <memory>
#include <string>
#include <vector>

#include "common/result.hpp"
#include "model/time.hpp"

namespace schoolsense::model {

// Site-local wall-clock handling. Accepts "UTC", fixed offsets of the form
// "UTC+02:00" / "UTC-05" and IANA zone ids resolved against the system
// zoneinfo database (TZif v2/v3, including the POSIX TZ footer rule for
// instants past the last stored transition). The engine itself never uses
// this; only analytics and the simulator reason in local time.
class TimeZone {
 public:
  static Result<TimeZone> load(const std::string& name);
  static TimeZone utc();

  const std::string& name() const { return name_; }

  std::int64_t offset_ms_at(Millis utc) const;
  CivilDateTime to_local(Millis utc) const;
  CivilDate local_date(Millis utc) const;

  // UTC instant of the given local wall-clock time (minutes past local
  // midnight). Around a DST jump the result is the post-transition reading.
  Millis from_local(const CivilDate& d, int minutes_of_day) const;
  Millis local_midnight_utc(const CivilDate& d) const { return from_local(d, 0); }

 private:
  struct Transition {
    Millis at_utc;
    std::int32_t offset_sec;
  };
  struct PosixRule {
    // M<month>.<week>.<weekday>[/time] style rule, offsets in seconds east.
    std::int32_t std_offset_sec = 0;
    std::int32_t dst_offset_sec = 0;
    bool has_dst = false;
    int start_month = 0, start_week = 0, start_weekday = 0, start_time_sec = 7200;
    int end_month = 0, end_week = 0, end_weekday = 0, end_time_sec = 7200;
  };

  std::string name_ = "UTC";
  std::int32_t fixed_offset_sec_ = 0;
  bool fixed_ = true;
  std::vector<Transition> transitions_;  // sorted by at_utc
  std::int32_t first_offset_sec_ = 0;
  std::shared_ptr<PosixRule> footer_;

  std::int32_t rule_offset_sec(Millis utc) const;
};

}  // namespace schoolsense::model
