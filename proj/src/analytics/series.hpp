#pragma once

#include <vector>

#include "common/result.hpp"
#include "model/types.hpp"

namespace schoolsense::analytics {

struct SeriesPoint {
  model::Millis ts = 0;
  double value = 0.0;
  bool synthetic = false;  // introduced by gap filling, not measured
};

// Ordered values of one resource, strictly increasing in time.
struct Series {
  model::ResourceId resource_id;
  std::string unit;
  std::vector<SeriesPoint> points;
};

Series series_from_readings(const std::vector<model::Reading>& readings);

// Mean per FIVE_MIN slot; output timestamps are slot starts.
Series resample_five_min(const Series& s);

// Linear interpolation between order statistics (quantile type 7).
double quantile(std::vector<double> sorted_values, double p);

enum class FenceSide { Lower, Upper };

struct OutlierFlag {
  std::size_t index = 0;
  model::Millis ts = 0;
  double original = 0.0;
  double replacement = 0.0;
  FenceSide fence = FenceSide::Lower;
};

struct OutlierConfig {
  model::Millis window_ms = 24LL * 3600 * 1000;  // trailing window span W
  double fence_multiplier = 3.0;                 // Q1 - k*IQR .. Q3 + k*IQR
};

struct OutlierResult {
  Series clean;
  std::vector<OutlierFlag> flags;
};

// Streaming IQR screen: each point is judged against the trailing window of
// already-cleaned values (the point itself excluded). Values outside
// [Q1 - 3*IQR, Q3 + 3*IQR] are flagged and replaced by the window minimum
// (low side) or maximum (high side) of in-fence values. Points within the
// first window span of the series are never flagged.
Result<OutlierResult> detect_outliers(const Series& s, const OutlierConfig& cfg = {});

struct GapFillConfig {
  model::Millis window_ms = 24LL * 3600 * 1000;  // centered window span W
};

// Fills every missing FIVE_MIN grid slot between the first and last point
// with the mean of measured values inside the centered window; when the
// window is empty the last known value is carried forward. Filled points
// are marked synthetic; measured points pass through untouched.
Result<Series> fill_gaps(const Series& s, const GapFillConfig& cfg = {});

}  // namespace schoolsense::analytics
