// Test-only brute-force oracles. They recompute expectations from first
// principles (group-by, sorting, hand quantiles) and never share code with
// the implementation paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "model/types.hpp"

namespace oracle {

using schoolsense::model::AggregationType;
using schoolsense::model::Granularity;
using schoolsense::model::IntervalKey;
using schoolsense::model::Millis;
using schoolsense::model::Reading;
using schoolsense::model::ResourceId;
using schoolsense::model::Summary;

struct Key {
  ResourceId resource;
  Granularity g;
  Millis start;
  auto operator<=>(const Key&) const = default;
};

// Full recomputation of every summary at every granularity from a raw log,
// deduplicated by (resource, timestamp), per the stated aggregation rules:
// five-minute summaries fold raw events; coarser levels take the unweighted
// mean of child averages, min/max over children, sums of counts/sums/energy.
inline std::map<Key, Summary> recompute(
    const std::vector<Reading>& log,
    const std::map<ResourceId, AggregationType>& types, double nominal_voltage = 230.0) {
  // dedup first-wins by (resource, timestamp)
  std::map<std::pair<ResourceId, Millis>, double> events;
  for (const auto& r : log) events.emplace(std::make_pair(r.resource_id, r.timestamp), r.value);

  std::map<Key, Summary> out;
  // five-minute level
  std::map<Key, std::vector<double>> groups;
  for (const auto& [key, value] : events) {
    Millis start = schoolsense::model::align(key.second, Granularity::FiveMin).start;
    groups[{key.first, Granularity::FiveMin, start}].push_back(value);
  }
  for (const auto& [key, values] : groups) {
    AggregationType type = types.at(key.resource);
    Summary s;
    s.count = std::int64_t(values.size());
    double sum = 0;
    double lo = values.front(), hi = values.front();
    for (double v : values) {
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    s.avg = sum / double(values.size());
    s.min = lo;
    s.max = hi;
    if (type == AggregationType::Total) s.sum = sum;
    if (type == AggregationType::Power) {
      s.avg *= nominal_voltage;
      s.min = nominal_voltage * lo;
      s.max = nominal_voltage * hi;
      IntervalKey ik{Granularity::FiveMin, key.start};
      s.energy_wh = s.avg * double(schoolsense::model::width_ms(ik)) / 3'600'000.0;
    }
    out[key] = s;
  }
  // cascade
  const Granularity levels[4] = {Granularity::Hour, Granularity::Day, Granularity::Month,
                                 Granularity::Year};
  Granularity child_level = Granularity::FiveMin;
  for (Granularity g : levels) {
    std::map<Key, std::vector<Summary>> parents;
    for (const auto& [key, s] : out) {
      if (key.g != child_level) continue;
      Millis pstart = schoolsense::model::align(key.start, g).start;
      parents[{key.resource, g, pstart}].push_back(s);
    }
    for (const auto& [key, children] : parents) {
      AggregationType type = types.at(key.resource);
      Summary s;
      double avg_sum = 0, total = 0, energy = 0;
      double lo = children.front().min, hi = children.front().max;
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
      out[key] = s;
    }
    child_level = g;
  }
  return out;
}

inline bool close(double a, double b, double rel = 1e-9) {
  double scale = std::max({std::abs(a), std::abs(b), 1e-12});
  return std::abs(a - b) <= rel * scale;
}

inline bool summaries_close(const Summary& a, const Summary& b, double rel = 1e-9) {
  if (a.count != b.count) return false;
  if (!close(a.avg, b.avg, rel) || !close(a.min, b.min, rel) || !close(a.max, b.max, rel))
    return false;
  if (a.sum.has_value() != b.sum.has_value()) return false;
  if (a.sum && !close(*a.sum, *b.sum, rel)) return false;
  if (a.energy_wh.has_value() != b.energy_wh.has_value()) return false;
  if (a.energy_wh && !close(*a.energy_wh, *b.energy_wh, rel)) return false;
  return true;
}

// Hand quantile: sort, then linear interpolation between order statistics.
inline double quantile7(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  if (values.size() == 1) return values[0];
  double h = double(values.size() - 1) * p;
  std::size_t lo = std::size_t(h);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - double(lo)) * (values[lo + 1] - values[lo]);
}

struct FenceDecision {
  bool flagged = false;
  bool low = false;
  std::optional<double> replacement;
};

// Independent per-point decision given the trailing window contents.
inline FenceDecision fence_check(const std::vector<double>& window, double value,
                                 double multiplier = 3.0) {
  FenceDecision d;
  if (window.empty()) return d;
  double q1 = quantile7(window, 0.25);
  double q3 = quantile7(window, 0.75);
  double iqr = q3 - q1;
  double lo = q1 - multiplier * iqr;
  double hi = q3 + multiplier * iqr;
  if (value >= lo && value <= hi) return d;
  d.flagged = true;
  d.low = value < lo;
  std::optional<double> repl;
  for (double w : window) {
    if (w < lo || w > hi) continue;
    if (!repl)
      repl = w;
    else
      repl = d.low ? std::min(*repl, w) : std::max(*repl, w);
  }
  d.replacement = repl;
  return d;
}

}  // namespace oracle
