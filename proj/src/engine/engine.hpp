#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "common/result.hpp"
#include "engine/aggregator.hpp"
#include "model/types.hpp"

namespace schoolsense::engine {

// Wall-clock latency of one full topology pass for one event.
struct EventLatencySample {
  model::AggregationType type;
  double latency_ms = 0.0;
};

struct LatencyStats {
  model::AggregationType type;
  std::uint64_t count = 0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p99_ms = 0.0;
};

struct EngineConfig {
  int retained_slots = 48;  // per granularity per resource
  PowerConfig power;
  bool instrument = false;
};

struct EngineCounters {
  std::uint64_t accepted = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t too_old = 0;
  std::uint64_t unknown_resource = 0;
};

// Continuous computation engine: per-resource cascaded tumbling-window
// aggregation over 5min -> hour -> day -> month -> year.
//
// Per-resource state has one logical writer; submissions for different
// resources may run in parallel (state is sharded behind per-resource
// locks). Summary updates are handed to the sink callback before submit()
// returns, finest granularity first.
class Engine {
 public:
  using UpdateSink = std::function<void(const model::IntervalSummary&)>;
  // Called when an interval falls out of the retention ring (its summary is
  // final as far as the engine is concerned).
  using EvictHook = std::function<void(const model::ResourceId&, const model::IntervalKey&)>;

  explicit Engine(EngineConfig cfg = {});

  void set_update_sink(UpdateSink sink) { sink_ = std::move(sink); }
  void set_evict_hook(EvictHook hook) { evict_ = std::move(hook); }

  // Resources must be registered before readings for them are submitted.
  void register_resource(const model::ResourceId& id, model::AggregationType type);
  bool is_registered(const model::ResourceId& id) const;

  // Folds one reading into the cascade. Returns the summaries whose value
  // changed, finest first. Duplicate (resource, timestamp) submissions
  // return an empty list; readings older than the oldest retained FIVE_MIN
  // slot return too_old.
  Result<std::vector<model::IntervalSummary>> submit(const model::Reading& r);

  EngineCounters counters() const;
  std::size_t resident_slots() const;  // across all resources and granularities

  bool instrumented() const { return cfg_.instrument; }
  void record_latency(const EventLatencySample& s);
  std::vector<LatencyStats> latency_report() const;
  std::vector<EventLatencySample> latency_samples(model::AggregationType type) const;

 private:
  struct Slot {
    model::IntervalKey key;
    std::map<model::Millis, double> events;          // FIVE_MIN only
    std::map<model::Millis, model::Summary> children;  // coarser levels
    model::Summary summary;
  };
  struct ResourceState {
    std::mutex mu;
    model::AggregationType type;
    std::array<std::map<model::Millis, Slot>, 5> rings;  // keyed by interval start
  };

  ResourceState* state_for(const model::ResourceId& id) const;

  EngineConfig cfg_;
  UpdateSink sink_;
  EvictHook evict_;

  mutable std::shared_mutex map_mu_;
  std::unordered_map<model::ResourceId, std::unique_ptr<ResourceState>> states_;

  mutable std::mutex counter_mu_;
  EngineCounters counters_;
  std::atomic<std::size_t> resident_slots_{0};

  mutable std::mutex latency_mu_;
  std::array<std::vector<double>, 3> latency_;  // indexed by AggregationType
};

}  // namespace schoolsense::engine
