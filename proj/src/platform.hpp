#pragma once

#include <memory>
#include <thread>

#include "common/result.hpp"
#include "engine/engine.hpp"
#include "ingest/bus.hpp"
#include "ingest/listener.hpp"
#include "model/topology.hpp"
#include "query/directory.hpp"
#include "query/service.hpp"
#include "store/raw_log.hpp"
#include "store/replay.hpp"
#include "store/summary_store.hpp"

namespace schoolsense {

struct PlatformConfig {
  std::string store_dir;
  std::string topology_path;  // optional
  bool auto_register = false;
  bool instrument = false;
  int retained_slots = 48;
  double nominal_voltage = 230.0;
  std::size_t queue_capacity = 8192;
};

struct PipelineCounters {
  std::uint64_t ingested = 0;
  std::uint64_t malformed = 0;
  std::uint64_t unknown = 0;
  std::uint64_t too_old = 0;
  std::uint64_t duplicates = 0;
};

// One process-local deployment: directory + raw/summary stores + engine +
// real-time dispatcher + ingest queue, wired together. The engine worker is
// the single consumer of the submit queue.
class Platform {
 public:
  static Result<std::unique_ptr<Platform>> open(const PlatformConfig& cfg);
  ~Platform();

  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  query::Directory& directory() { return directory_; }
  engine::Engine& engine() { return engine_; }
  store::RawLog& raw() { return raw_; }
  store::SummaryStore& summaries() { return summaries_; }
  query::Dispatcher& dispatcher() { return dispatcher_; }
  query::QueryService& query() { return query_; }
  ingest::SubmitQueue& queue() { return queue_; }
  const model::Topology& topology() const { return topology_; }

  // Full pipeline for one reading: raw append, then aggregation. Readings
  // for unregistered resources are quarantined (or registered on the fly
  // when auto_register is on).
  Status submit_reading(const model::Reading& r);

  // Wire-format entry points. The async variants forward into the submit
  // queue (the engine worker must be running); the sync variant runs the
  // pipeline inline.
  Status ingest_message(const ingest::BusMessage& msg, model::Millis now);
  Status ingest_message_sync(const ingest::BusMessage& msg, model::Millis now);
  Status ingest_line(const std::string& line, model::Millis now);

  void start_worker();
  void stop_worker();  // closes the queue, drains, joins

  // Line listener bound to addr feeding the pipeline (service mode).
  Status start_listener(const std::string& addr);
  void stop_listener();
  int listener_port() const { return listener_.bound_port(); }

  void flush();
  PipelineCounters counters() const;

 private:
  explicit Platform(const PlatformConfig& cfg);
  Result<model::Reading> parse_message(const ingest::BusMessage& msg, model::Millis now);
  void worker_loop();

  PlatformConfig cfg_;
  model::Topology topology_;
  query::Directory directory_;
  store::RawLog raw_;
  store::SummaryStore summaries_;
  engine::Engine engine_;
  query::Dispatcher dispatcher_;
  query::QueryService query_;
  ingest::SubmitQueue queue_;
  ingest::LineListener listener_;
  std::thread worker_;
  mutable std::mutex counter_mu_;
  PipelineCounters counters_;
};

}  // namespace schoolsense
