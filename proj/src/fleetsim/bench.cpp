#include "fleetsim/bench.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace schoolsense::fleetsim {

using model::AggregationType;
using model::Millis;
using model::Reading;

namespace {

// Measurement shares by type roughly as observed in production fleets:
// averages dominate, power meters contribute an eighth, totals a trickle.
struct BenchResource {
  std::string id;
  AggregationType type;
};

std::vector<BenchResource> make_bench_fleet(Platform& platform) {
  std::vector<BenchResource> fleet;
  auto add = [&](const std::string& device, const std::string& sensor,
                 model::ResourceKind kind) {
    model::ResourceDescriptor d;
    d.device = device;
    d.sensor = sensor;
    d.resource_id = device + "." + sensor;
    d.kind = kind;
    d.site_id = "bench";
    platform.directory().register_resource(d);
    AggregationType type = model::aggregation_for(kind, sensor);
    platform.engine().register_resource(d.resource_id, type);
    fleet.push_back({d.resource_id, type});
  };
  // 86 average / 1 total / 13 power out of every 100 slots
  for (int i = 0; i < 86; ++i)
    add("bench-avg-" + std::to_string(i), "temperature", model::ResourceKind::Environmental);
  add("bench-total-0", "precipitation", model::ResourceKind::Weather);
  for (int i = 0; i < 13; ++i)
    add("bench-power-" + std::to_string(i), "current", model::ResourceKind::Power);
  return fleet;
}

}  // namespace

Result<BenchReport> bench(Platform& platform, const BenchConfig& cfg) {
  if (cfg.rate < 0 || cfg.duration_s < 0)
    return Error{Errc::invalid_argument, "rate and duration must be >= 0"};
  BenchReport report;
  report.target_rate = cfg.rate;
  report.duration_s = cfg.duration_s;
  if (cfg.rate == 0 || cfg.duration_s == 0) return report;  // empty run, not an error

  auto fleet = make_bench_fleet(platform);
  platform.start_worker();

  const auto start = std::chrono::steady_clock::now();
  const Millis stream_base = model::parse_time("2017-09-04T00:00:00Z").value();
  const std::uint64_t total = std::uint64_t(cfg.rate * cfg.duration_s);
  std::uint64_t sent = 0, drops = 0;
  std::mt19937_64 jitter(cfg.seed);

  for (std::uint64_t i = 0; i < total; ++i) {
    // pace to the target rate
    const auto due = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                 std::chrono::duration<double>(double(i) / cfg.rate));
    std::this_thread::sleep_until(due);

    const BenchResource& res = fleet[i % fleet.size()];
    double wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Reading r;
    r.resource_id = res.id;
    r.value = res.type == AggregationType::Power ? 10.0 + double(jitter() % 100) / 10.0
                                                 : 20.0 + double(jitter() % 100) / 10.0;
    // stream time runs faster than wall time so interval boundaries roll
    r.timestamp = stream_base + Millis(wall_s * cfg.time_dilation * 1000.0) + Millis(i % 7);
    r.device = res.id;
    r.sensor = "bench";
    Status st = ingest::forward(r, platform.queue());
    if (st.ok())
      ++sent;
    else
      ++drops;
  }
  platform.stop_worker();  // drains the queue
  const double wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  report.submitted = sent;
  report.drops = drops;
  auto counters = platform.counters();
  report.processed = counters.ingested + counters.duplicates + counters.too_old;
  report.wall_s = wall_s;
  report.throughput = wall_s > 0 ? double(report.processed) / wall_s : 0.0;
  for (const auto& stats : platform.engine().latency_report())
    report.per_type.push_back({stats.type, stats.count, stats.mean_ms, stats.median_ms,
                               stats.p99_ms});
  return report;
}

std::string bench_report_json(const BenchReport& r) {
  nlohmann::json j;
  j["target_rate"] = r.target_rate;
  j["duration_s"] = r.duration_s;
  j["submitted"] = r.submitted;
  j["processed"] = r.processed;
  j["drops"] = r.drops;
  j["wall_s"] = r.wall_s;
  j["throughput_msg_s"] = r.throughput;
  j["latency_ms"] = nlohmann::json::array();
  for (const auto& t : r.per_type)
    j["latency_ms"].push_back({{"type", model::to_string(t.type)},
                               {"count", t.count},
                               {"mean", t.mean_ms},
                               {"median", t.median_ms},
                               {"p99", t.p99_ms}});
  return j.dump(2);
}

std::string bench_report_text(const BenchReport& r) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line),
                "rate target %.0f msg/s  processed %llu/%llu  drops %llu  wall %.1fs  "
                "throughput %.1f msg/s\n",
                r.target_rate, (unsigned long long)r.processed, (unsigned long long)r.submitted,
                (unsigned long long)r.drops, r.wall_s, r.throughput);
  os << line;
  os << "type        count    mean_ms  median_ms  p99_ms\n";
  for (const auto& t : r.per_type) {
    std::snprintf(line, sizeof(line), "%-10s %7llu %9.4f %10.4f %8.4f\n",
                  model::to_string(t.type), (unsigned long long)t.count, t.mean_ms, t.median_ms,
                  t.p99_ms);
    os << line;
  }
  return os.str();
}

}  // namespace schoolsense::fleetsim
