#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "common/result.hpp"
#include "model/types.hpp"
#include "query/directory.hpp"

namespace schoolsense::ingest {

// Plain-text bus message: topic names the device and sensor, payload holds
// the value ("124B00061ED466/temperature" -> "20"). An optional "@<epoch_ms>"
// payload suffix carries an explicit timestamp for replay and simulation.
struct BusMessage {
  std::string topic;
  std::string payload;
};

struct ParseOptions {
  bool auto_register = false;  // register unknown (device, sensor) pairs on sight
};

Result<model::Reading> parse_bus_message(const BusMessage& msg, model::Millis now,
                                         query::Directory& directory,
                                         const ParseOptions& opts = {});

// Canonical wire form of a reading (always carries the explicit timestamp).
BusMessage format_bus_message(const model::Reading& r);

// Line form used by the socket transport: "<topic>\t<payload>".
std::string to_line(const BusMessage& msg);
std::optional<BusMessage> from_line(const std::string& line);

// Bounded MPSC queue feeding the engine worker; the submission endpoint for
// mappers. push fails with backpressure when full.
class SubmitQueue {
 public:
  explicit SubmitQueue(std::size_t capacity = 8192) : capacity_(capacity) {}

  Status try_push(model::Reading r);
  // Blocks until a reading arrives or the queue is closed and drained.
  std::optional<model::Reading> pop();
  void close();
  bool closed() const;
  std::size_t size() const;

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<model::Reading> q_;
  bool closed_ = false;
};

struct ForwardPolicy {
  int max_attempts = 8;
  int initial_backoff_us = 200;  // doubled per retry
};

// At-least-once delivery into the queue with bounded exponential backoff.
Status forward(model::Reading r, SubmitQueue& sink, const ForwardPolicy& policy = {});

// Poll-based mapper state. fetch returns vendor records (already normalized
// to readings); poll_cycle drops records at or before the cursor, sorts the
// rest, and advances the cursor.
struct PollSource {
  std::string source_id;
  std::int32_t poll_period_s = 300;
  model::Millis cursor = 0;
};

using FetchFn = std::function<Result<std::vector<model::Reading>>(model::Millis cursor)>;

Result<std::vector<model::Reading>> poll_cycle(PollSource& src, const FetchFn& fetch);

}  // namespace schoolsense::ingest
