#include "engine/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace schoolsense::engine {

using model::AggregationType;
using model::Granularity;
using model::IntervalKey;
using model::IntervalSummary;
using model::Millis;
using model::Reading;
using model::ResourceId;
using model::Summary;

Engine::Engine(EngineConfig cfg) : cfg_(cfg) {}

void Engine::register_resource(const ResourceId& id, AggregationType type) {
  std::unique_lock lock(map_mu_);
  auto it = states_.find(id);
  if (it == states_.end()) {
    auto st = std::make_unique<ResourceState>();
    st->type = type;
    states_.emplace(id, std::move(st));
  } else {
    it->second->type = type;
  }
}

bool Engine::is_registered(const ResourceId& id) const {
  std::shared_lock lock(map_mu_);
  return states_.count(id) != 0;
}

Engine::ResourceState* Engine::state_for(const ResourceId& id) const {
  std::shared_lock lock(map_mu_);
  auto it = states_.find(id);
  return it == states_.end() ? nullptr : it->second.get();
}

Result<std::vector<IntervalSummary>> Engine::submit(const Reading& r) {
  const auto t0 = std::chrono::steady_clock::now();
  if (r.timestamp <= 0 || !std::isfinite(r.value))
    return Error{Errc::invalid_argument, "reading needs ts > 0 and a finite value"};
  ResourceState* st = state_for(r.resource_id);
  if (!st) {
    std::lock_guard c(counter_mu_);
    ++counters_.unknown_resource;
    return Error{Errc::unknown_resource, "resource not registered: " + r.resource_id};
  }

  std::vector<IntervalSummary> updated;
  AggregationType type;
  {
    std::lock_guard lock(st->mu);
    type = st->type;
    auto& ring5 = st->rings[0];
    IntervalKey k5 = model::align(r.timestamp, Granularity::FiveMin);

    if (std::size_t(cfg_.retained_slots) <= ring5.size() && !ring5.empty() &&
        k5.start < ring5.begin()->first) {
      std::lock_guard c(counter_mu_);
      ++counters_.too_old;
      return Error{Errc::too_old, "reading precedes the oldest retained 5-min slot"};
    }

    auto [it5, inserted] = ring5.try_emplace(k5.start);
    Slot& slot5 = it5->second;
    if (inserted) {
      slot5.key = k5;
      resident_slots_.fetch_add(1, std::memory_order_relaxed);
    }
    if (!slot5.events.emplace(r.timestamp, r.value).second) {
      std::lock_guard c(counter_mu_);
      ++counters_.duplicates;
      return std::vector<IntervalSummary>{};  // duplicate (resource, timestamp)
    }

    slot5.summary = fold_events(slot5.events, type, k5, cfg_.power);
    updated.push_back({r.resource_id, k5, slot5.summary});

    // Cascade: push the refreshed child summary into each coarser ring.
    IntervalKey child_key = k5;
    Summary child_summary = slot5.summary;
    for (std::size_t gi = 1; gi < model::kAllGranularities.size(); ++gi) {
      Granularity g = model::kAllGranularities[gi];
      IntervalKey pk = model::align(child_key.start, g);
      auto& ring = st->rings[gi];
      if (std::size_t(cfg_.retained_slots) <= ring.size() && !ring.empty() &&
          pk.start < ring.begin()->first)
        break;  // parent already evicted; finer summaries stay updated
      auto [it, fresh] = ring.try_emplace(pk.start);
      Slot& pslot = it->second;
      if (fresh) {
        pslot.key = pk;
        resident_slots_.fetch_add(1, std::memory_order_relaxed);
      }
      pslot.children[child_key.start] = child_summary;
      std::vector<Summary> kids;
      kids.reserve(pslot.children.size());
      for (const auto& [start, s] : pslot.children) kids.push_back(s);
      pslot.summary = roll_up(kids, type).take();
      updated.push_back({r.resource_id, pk, pslot.summary});
      child_key = pk;
      child_summary = pslot.summary;
    }

    // Evict beyond retention (never the slot just touched: admission above
    // guarantees new keys are not older than the current minimum).
    for (std::size_t gi = 0; gi < st->rings.size(); ++gi) {
      auto& ring = st->rings[gi];
      while (ring.size() > std::size_t(cfg_.retained_slots)) {
        IntervalKey gone = ring.begin()->second.key;
        ring.erase(ring.begin());
        resident_slots_.fetch_sub(1, std::memory_order_relaxed);
        if (evict_) evict_(r.resource_id, gone);
      }
    }
  }

  {
    std::lock_guard c(counter_mu_);
    ++counters_.accepted;
  }
  if (sink_)
    for (const auto& u : updated) sink_(u);
  if (cfg_.instrument) {
    const auto t1 = std::chrono::steady_clock::now();
    record_latency({type, std::chrono::duration<double, std::milli>(t1 - t0).count()});
  }
  return updated;
}

EngineCounters Engine::counters() const {
  std::lock_guard c(counter_mu_);
  return counters_;
}

std::size_t Engine::resident_slots() const {
  return resident_slots_.load(std::memory_order_relaxed);
}

void Engine::record_latency(const EventLatencySample& s) {
  std::lock_guard lock(latency_mu_);
  latency_[std::size_t(s.type)].push_back(s.latency_ms);
}

std::vector<EventLatencySample> Engine::latency_samples(AggregationType type) const {
  std::lock_guard lock(latency_mu_);
  std::vector<EventLatencySample> out;
  for (double ms : latency_[std::size_t(type)]) out.push_back({type, ms});
  return out;
}

std::vector<LatencyStats> Engine::latency_report() const {
  std::lock_guard lock(latency_mu_);
  std::vector<LatencyStats> out;
  for (std::size_t i = 0; i < latency_.size(); ++i) {
    const auto& samples = latency_[i];
    if (samples.empty()) continue;  // types never submitted are absent
    LatencyStats st;
    st.type = AggregationType(i);
    st.count = samples.size();
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double v : sorted) sum += v;
    st.mean_ms = sum / double(sorted.size());
    st.median_ms = sorted[(sorted.size() - 1) / 2];
    st.p99_ms = sorted[std::size_t(std::ceil(0.99 * double(sorted.size()))) - 1];
    out.push_back(st);
  }
  return out;
}

}  // namespace schoolsense::engine
