#include "store/replay.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

namespace schoolsense::store {

using model::Millis;
using model::Reading;

Result<ReplayReport> replay(const RawLog& raw, const ReplayOptions& opts,
                            const ReplaySink& sink) {
  if (opts.from >= opts.to) return Error{Errc::invalid_argument, "empty replay range"};

  std::vector<Reading> all;
  for (const auto& resource : raw.resources()) {
    auto part = raw.get_raw(resource, opts.from, opts.to);
    if (part.ok())
      for (auto& r : part.value()) all.push_back(std::move(r));
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const Reading& a, const Reading& b) { return a.timestamp < b.timestamp; });

  ReplayReport report;
  const bool paced = opts.speed > 0.0;
  const auto wall_start = std::chrono::steady_clock::now();
  Millis stream_start = all.empty() ? 0 : all.front().timestamp;
  for (const auto& r : all) {
    if (paced) {
      double due_ms = double(r.timestamp - stream_start) / opts.speed;
      auto due = wall_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                  std::chrono::duration<double, std::milli>(due_ms));
      std::this_thread::sleep_until(due);
    }
    if (!sink(r)) {
      report.aborted_at = r.timestamp;
      report.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - wall_start)
                           .count();
      return Error{Errc::sink_failure,
                   "replay sink failed at " + model::format_iso8601(r.timestamp) + " after " +
                       std::to_string(report.delivered) + " readings"};
    }
    ++report.delivered;
  }
  report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - wall_start)
          .count();
  return report;
}

}  // namespace schoolsense::store
