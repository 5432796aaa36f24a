#include "platform.hpp"

#include <chrono>

namespace schoolsense {

using model::Reading;

Platform::Platform(const PlatformConfig& cfg)
    : cfg_(cfg),
      raw_(cfg.store_dir),
      summaries_(cfg.store_dir),
      engine_(engine::EngineConfig{cfg.retained_slots, {cfg.nominal_voltage}, cfg.instrument}),
      query_(directory_, summaries_),
      queue_(cfg.queue_capacity) {
  engine_.set_update_sink([this](const model::IntervalSummary& s) {
    summaries_.put(s);
    dispatcher_.publish(s);
  });
  engine_.set_evict_hook([this](const model::ResourceId& id, const model::IntervalKey& key) {
    summaries_.finalize(id, key);
  });
}

Result<std::unique_ptr<Platform>> Platform::open(const PlatformConfig& cfg) {
  if (cfg.store_dir.empty())
    return Error{Errc::invalid_argument, "store directory is required"};
  std::unique_ptr<Platform> p(new Platform(cfg));
  if (!cfg.topology_path.empty()) {
    auto topo = model::load_topology(cfg.topology_path);
    if (!topo.ok()) return topo.error();
    p->topology_ = topo.take();
    auto st = p->directory_.register_topology(p->topology_);
    if (!st.ok()) return st.error();
    for (const auto& site : p->topology_.sites)
      for (const auto& res : site.resources)
        p->engine_.register_resource(res.resource_id,
                                     model::aggregation_for(res.kind, res.sensor));
  }
  return p;
}

Platform::~Platform() {
  stop_listener();
  stop_worker();
  flush();
}

Status Platform::submit_reading(const Reading& r) {
  if (!directory_.find(r.resource_id)) {
    if (!cfg_.auto_register) {
      raw_.quarantine(r);
      std::lock_guard lock(counter_mu_);
      ++counters_.unknown;
      return Error{Errc::unknown_resource, "unregistered resource: " + r.resource_id};
    }
    model::ResourceDescriptor d;
    d.resource_id = r.resource_id;
    d.device = r.device;
    d.sensor = r.sensor;
    auto id = directory_.register_resource(d);
    if (!id.ok()) return id.error();
    engine_.register_resource(id.value(), model::aggregation_for(d.kind, d.sensor));
  }
  if (!engine_.is_registered(r.resource_id))
    engine_.register_resource(r.resource_id, model::AggregationType::Average);

  Status stored = raw_.append(r);
  if (!stored.ok()) return stored;
  auto res = engine_.submit(r);
  std::lock_guard lock(counter_mu_);
  if (res.ok()) {
    if (res.value().empty())
      ++counters_.duplicates;
    else
      ++counters_.ingested;
    return Status::success();
  }
  if (res.code() == Errc::too_old) {
    ++counters_.too_old;  // raw copy kept, aggregation skipped
    return Status::success();
  }
  return res.error();
}

namespace {

model::Millis wall_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

Result<Reading> Platform::parse_message(const ingest::BusMessage& msg, model::Millis now) {
  ingest::ParseOptions opts;
  opts.auto_register = cfg_.auto_register;
  auto parsed = ingest::parse_bus_message(msg, now > 0 ? now : wall_now_ms(), directory_, opts);
  if (!parsed.ok()) {
    if (parsed.code() == Errc::unknown_resource) {
      // still persisted, under quarantine, in original form
      std::size_t slash = msg.topic.find('/');
      Reading r;
      r.device = msg.topic.substr(0, slash);
      r.sensor = msg.topic.substr(slash + 1);
      r.resource_id = r.device + "." + r.sensor;
      std::string payload = msg.payload;
      if (auto at = payload.rfind('@'); at != std::string::npos) {
        r.timestamp = std::atoll(payload.substr(at + 1).c_str());
        payload = payload.substr(0, at);
      } else {
        r.timestamp = now > 0 ? now : wall_now_ms();
      }
      r.value = std::atof(payload.c_str());
      raw_.quarantine(r);
      std::lock_guard lock(counter_mu_);
      ++counters_.unknown;
    } else {
      std::lock_guard lock(counter_mu_);
      ++counters_.malformed;
    }
    return parsed.error();
  }
  if (cfg_.auto_register && !engine_.is_registered(parsed.value().resource_id))
    engine_.register_resource(parsed.value().resource_id, model::AggregationType::Average);
  return parsed;
}

Status Platform::ingest_message(const ingest::BusMessage& msg, model::Millis now) {
  auto parsed = parse_message(msg, now);
  if (!parsed.ok()) return parsed.error();
  return ingest::forward(parsed.take(), queue_);
}

Status Platform::ingest_message_sync(const ingest::BusMessage& msg, model::Millis now) {
  auto parsed = parse_message(msg, now);
  if (!parsed.ok()) return parsed.error();
  return submit_reading(parsed.value());
}

Status Platform::ingest_line(const std::string& line, model::Millis now) {
  auto msg = ingest::from_line(line);
  if (!msg) {
    std::lock_guard lock(counter_mu_);
    ++counters_.malformed;
    return Error{Errc::malformed_topic, "line is not <topic>\\t<payload>"};
  }
  return ingest_message(*msg, now);
}

void Platform::worker_loop() {
  while (auto r = queue_.pop()) submit_reading(*r);
}

void Platform::start_worker() {
  if (worker_.joinable()) return;
  worker_ = std::thread([this] { worker_loop(); });
}

void Platform::stop_worker() {
  if (!worker_.joinable()) return;
  queue_.close();
  worker_.join();
}

Status Platform::start_listener(const std::string& addr) {
  return listener_.start(addr, [this](const std::string& line) {
    auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
                   .count();
    ingest_line(line, now);
  });
}

void Platform::stop_listener() { listener_.stop(); }

void Platform::flush() {
  raw_.flush();
  summaries_.flush();
}

PipelineCounters Platform::counters() const {
  std::lock_guard lock(counter_mu_);
  return counters_;
}

}  // namespace schoolsense
