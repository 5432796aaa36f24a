#pragma once

#include <map>
#include <vector>

#include "common/result.hpp"
#include "model/types.hpp"

namespace schoolsense::engine {

// Numeric folds for the three aggregation types. All folds iterate their
// inputs in time order so that recomputation is bit-reproducible regardless
// of arrival order.

struct PowerConfig {
  double nominal_voltage = 230.0;  // volts per phase
};

// Fold raw events of one interval into its summary. Events are keyed by
// timestamp (the dedup key) and hold the raw sensor value; for POWER
// resources the raw value is current in amperes.
model::Summary fold_events(const std::map<model::Millis, double>& events,
                           model::AggregationType type, const model::IntervalKey& interval,
                           const PowerConfig& power);

// Derive a parent summary from its child summaries (in child start order).
// AVERAGE: unweighted mean of child averages, min/max over children, counts
// summed. TOTAL additionally sums child sums; POWER sums child energies.
Result<model::Summary> roll_up(const std::vector<model::Summary>& children,
                               model::AggregationType type);

// Average power and energy for a set of current samples inside an interval.
Result<std::pair<double, double>> aggregate_power(
    const std::vector<std::pair<double, model::Millis>>& amp_samples,
    const model::IntervalKey& interval, const PowerConfig& power);

}  // namespace schoolsense::engine
