#include "engine/aggregator.hpp"

#include <algorithm>

namespace schoolsense::engine {

using model::AggregationType;
using model::IntervalKey;
using model::Millis;
using model::Summary;

Summary fold_events(const std::map<Millis, double>& events, AggregationType type,
                    const IntervalKey& interval, const PowerConfig& power) {
  Summary s;
  if (events.empty()) return s;
  double sum = 0.0;
  double lo = events.begin()->second, hi = events.begin()->second;
  for (const auto& [ts, v] : events) {
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  s.count = std::int64_t(events.size());
  switch (type) {
    case AggregationType::Average:
      s.avg = sum / double(s.count);
      s.min = lo;
      s.max = hi;
      break;
    case AggregationType::Total:
      s.avg = sum / double(s.count);
      s.min = lo;
      s.max = hi;
      s.sum = sum;
      break;
    case AggregationType::Power: {
      // raw values are amperes; summaries carry watts
      double mean_amps = sum / double(s.count);
      s.avg = power.nominal_voltage * mean_amps;
      s.min = power.nominal_voltage * lo;
      s.max = power.nominal_voltage * hi;
      s.energy_wh = s.avg * double(model::width_ms(interval)) / 3'600'000.0;
      break;
    }
  }
  return s;
}

Result<Summary> roll_up(const std::vector<Summary>& children, AggregationType type) {
  if (children.empty()) return Error{Errc::empty_children, "roll_up over no children"};
  Summary s;
  double avg_sum = 0.0;
  double lo = children.front().min, hi = children.front().max;
  double total = 0.0, energy = 0.0;
  for (const auto& c : children) {
    avg_sum += c.avg;
    lo = std::min(lo, c.min);
    hi = std::max(hi, c.max);
    s.count += c.count;
    if (c.sum) total += *c.sum;
    if (c.energy_wh) energy += *c.energy_wh;
  }
  s.avg = avg_sum / double(children.size());
  s.min = lo;
  s.max = hi;
  if (type == AggregationType::Total) s.sum = total;
  if (type == AggregationType::Power) s.energy_wh = energy;
  return s;
}

Result<std::pair<double, double>> aggregate_power(
    const std::vector<std::pair<double, Millis>>& amp_samples, const IntervalKey& interval,
    const PowerConfig& power) {
  if (amp_samples.empty()) return Error{Errc::no_samples, "no current samples"};
  std::map<Millis, double> events;
  for (const auto& [amps, ts] : amp_samples) events.emplace(ts, amps);
  Summary s = fold_events(events, AggregationType::Power, interval, power);
  return std::pair<double, double>{s.avg, *s.energy_wh};
}

}  // namespace schoolsense::engine
