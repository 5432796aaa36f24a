#include "common/result.hpp"

namespace schoolsense {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::ok: return "ok";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::malformed_topic: return "malformed_topic";
    case Errc::malformed_payload: return "malformed_payload";
    case Errc::unknown_resource: return "unknown_resource";
    case Errc::duplicate_resource: return "duplicate_resource";
    case Errc::too_old: return "too_old";
    case Errc::backpressure: return "backpressure";
    case Errc::source_unavailable: return "source_unavailable";
    case Errc::empty_children: return "empty_children";
    case Errc::no_samples: return "no_samples";
    case Errc::empty_series: return "empty_series";
    case Errc::no_data: return "no_data";
    case Errc::no_evaluable_hours: return "no_evaluable_hours";
    case Errc::no_weekend_data: return "no_weekend_data";
    case Errc::range_too_large: return "range_too_large";
    case Errc::storage_full: return "storage_full";
    case Errc::io_failure: return "io_failure";
    case Errc::sink_failure: return "sink_failure";
    case Errc::unauthorized: return "unauthorized";
    case Errc::invalid_config: return "invalid_config";
    case Errc::engine_unavailable: return "engine_unavailable";
    case Errc::internal: return "internal";
  }
  return "unknown";
}

}  // namespace schoolsense
