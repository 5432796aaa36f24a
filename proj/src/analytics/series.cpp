#include "analytics/series.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace schoolsense::analytics {

using model::Millis;

Series series_from_readings(const std::vector<model::Reading>& readings) {
  Series s;
  if (!readings.empty()) s.resource_id = readings.front().resource_id;
  s.points.reserve(readings.size());
  for (const auto& r : readings) {
    if (!s.points.empty() && r.timestamp <= s.points.back().ts) continue;  // keep strict order
    s.points.push_back({r.timestamp, r.value, false});
  }
  return s;
}

Series resample_five_min(const Series& s) {
  Series out;
  out.resource_id = s.resource_id;
  out.unit = s.unit;
  std::size_t i = 0;
  while (i < s.points.size()) {
    Millis slot = model::align(s.points[i].ts, model::Granularity::FiveMin).start;
    double sum = 0.0;
    std::size_t n = 0;
    while (i < s.points.size() &&
           model::align(s.points[i].ts, model::Granularity::FiveMin).start == slot) {
      sum += s.points[i].value;
      ++n;
      ++i;
    }
    out.points.push_back({slot, sum / double(n), false});
  }
  return out;
}

double quantile(std::vector<double> sorted_values, double p) {
  const std::size_t n = sorted_values.size();
  if (n == 0) return std::nan("");
  if (n == 1) return sorted_values[0];
  double h = double(n - 1) * p;
  std::size_t lo = std::size_t(std::floor(h));
  if (lo >= n - 1) return sorted_values[n - 1];
  double frac = h - double(lo);
  return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

Result<OutlierResult> detect_outliers(const Series& s, const OutlierConfig& cfg) {
  if (s.points.empty()) return Error{Errc::empty_series, "cannot screen an empty series"};
  if (cfg.window_ms <= 0) return Error{Errc::invalid_argument, "window span must be > 0"};

  OutlierResult out;
  out.clean = s;
  auto& pts = out.clean.points;
  const Millis first_ts = pts.front().ts;

  std::deque<std::pair<Millis, double>> window;  // cleaned history, time order
  std::vector<double> sorted;                    // same values, value order

  auto sorted_insert = [&](double v) {
    sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), v), v);
  };
  auto sorted_erase = [&](double v) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
    if (it != sorted.end()) sorted.erase(it);
  };

  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Millis t = pts[i].ts;
    while (!window.empty() && window.front().first < t - cfg.window_ms) {
      sorted_erase(window.front().second);
      window.pop_front();
    }
    const bool warmed_up = t - first_ts >= cfg.window_ms;
    if (warmed_up && !window.empty()) {
      double q1 = quantile(sorted, 0.25);
      double q3 = quantile(sorted, 0.75);
      double iqr = q3 - q1;
      double lo = q1 - cfg.fence_multiplier * iqr;
      double hi = q3 + cfg.fence_multiplier * iqr;
      double v = pts[i].value;
      if (v < lo || v > hi) {
        // replacement: min/max over in-fence window values
        bool low = v < lo;
        double repl = 0.0;
        bool found = false;
        for (double w : sorted) {
          if (w < lo || w > hi) continue;
          if (!found) {
            repl = w;
            found = true;
          } else {
            repl = low ? std::min(repl, w) : std::max(repl, w);
          }
        }
        if (found) {
          OutlierFlag flag;
          flag.index = i;
          flag.ts = t;
          flag.original = v;
          flag.replacement = repl;
          flag.fence = low ? FenceSide::Lower : FenceSide::Upper;
          out.flags.push_back(flag);
          pts[i].value = repl;
        }
      }
    }
    window.emplace_back(t, pts[i].value);
    sorted_insert(pts[i].value);
  }
  return out;
}

Result<Series> fill_gaps(const Series& s, const GapFillConfig& cfg) {
  if (s.points.empty()) return Error{Errc::empty_series, "cannot fill an empty series"};
  for (const auto& p : s.points)
    if (p.ts % model::kFiveMinutes != 0)
      return Error{Errc::invalid_argument, "fill_gaps needs a FIVE_MIN-aligned series"};
  const Millis step = model::kFiveMinutes;
  const Millis half = cfg.window_ms / 2;

  Series out;
  out.resource_id = s.resource_id;
  out.unit = s.unit;

  const auto& in = s.points;
  Millis start = model::align(in.front().ts, model::Granularity::FiveMin).start;
  Millis end = model::align(in.back().ts, model::Granularity::FiveMin).start;

  std::size_t next = 0;  // next measured point
  std::size_t lo = 0;    // measured-window bounds for the mean
  std::size_t hi = 0;
  for (Millis t = start; t <= end; t += step) {
    if (next < in.size() && in[next].ts == t) {
      out.points.push_back(in[next]);
      ++next;
      continue;
    }
    while (lo < in.size() && in[lo].ts < t - half) ++lo;
    if (hi < lo) hi = lo;
    while (hi < in.size() && in[hi].ts <= t + half) ++hi;
    double value;
    if (lo < hi) {
      double sum = 0.0;
      for (std::size_t j = lo; j < hi; ++j) sum += in[j].value;
      value = sum / double(hi - lo);
    } else {
      value = out.points.back().value;  // empty window: carry last known forward
    }
    out.points.push_back({t, value, true});
  }
  return out;
}

}  // namespace schoolsense::analytics
