#pragma once

#include <functional>
#include <limits>

#include "common/result.hpp"
#include "store/raw_log.hpp"

namespace schoolsense::store {

struct ReplayOptions {
  model::Millis from = 0;
  model::Millis to = std::numeric_limits<model::Millis>::max();
  // Gap scaling factor; <= 0 means as-fast-as-possible.
  double speed = 0.0;
};

struct ReplayReport {
  std::uint64_t delivered = 0;
  double wall_ms = 0.0;
  std::optional<model::Millis> aborted_at;  // timestamp where the sink failed
};

// Re-delivers stored readings in timestamp order. The sink returns false to
// abort (reported as sink_failure with the position reached).
using ReplaySink = std::function<bool(const model::Reading&)>;

Result<ReplayReport> replay(const RawLog& raw, const ReplayOptions& opts, const ReplaySink& sink);

}  // namespace schoolsense::store
