#pragma once

#include "common/result.hpp"
#include "platform.hpp"

namespace schoolsense::fleetsim {

struct BenchConfig {
  double rate = 500.0;      // target messages per second
  double duration_s = 60.0;
  double time_dilation = 60.0;  // stream-time seconds per wall second
  std::uint64_t seed = 7;
};

struct BenchTypeStats {
  model::AggregationType type;
  std::uint64_t count = 0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p99_ms = 0.0;
};

struct BenchReport {
  double target_rate = 0.0;
  double duration_s = 0.0;
  std::uint64_t submitted = 0;
  std::uint64_t processed = 0;
  std::uint64_t drops = 0;  // backpressure failures after retries
  double wall_s = 0.0;
  double throughput = 0.0;  // processed / wall
  std::vector<BenchTypeStats> per_type;
};

// Drives the platform's ingest queue at the target rate with a synthetic
// mix of the three aggregation types (production shares: mostly averages,
// some power, a trickle of totals) while the single engine worker drains.
// The platform must be opened with instrumentation for latency stats.
Result<BenchReport> bench(Platform& platform, const BenchConfig& cfg);

std::string bench_report_json(const BenchReport& r);
std::string bench_report_text(const BenchReport& r);

}  // namespace schoolsense::fleetsim
