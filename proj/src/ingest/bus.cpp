#include "ingest/bus.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <thread>

namespace schoolsense::ingest {

using model::Millis;
using model::Reading;

Result<Reading> parse_bus_message(const BusMessage& msg, Millis now,
                                  query::Directory& directory, const ParseOptions& opts) {
  // topic: exactly two '/'-separated segments, device then sensor
  std::size_t slash = msg.topic.find('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 >= msg.topic.size() ||
      msg.topic.find('/', slash + 1) != std::string::npos)
    return Error{Errc::malformed_topic, "topic must be <device>/<sensor>: " + msg.topic};
  std::string device = msg.topic.substr(0, slash);
  std::string sensor = msg.topic.substr(slash + 1);

  std::string_view payload(msg.payload);
  Millis ts = now;
  if (std::size_t at = payload.rfind('@'); at != std::string_view::npos) {
    std::string_view ts_part = payload.substr(at + 1);
    auto res = std::from_chars(ts_part.data(), ts_part.data() + ts_part.size(), ts);
    if (res.ec != std::errc() || res.ptr != ts_part.data() + ts_part.size() || ts <= 0)
      return Error{Errc::malformed_payload, "bad timestamp suffix: " + msg.payload};
    payload = payload.substr(0, at);
  }
  double value = 0.0;
  auto res = std::from_chars(payload.data(), payload.data() + payload.size(), value);
  if (res.ec != std::errc() || res.ptr != payload.data() + payload.size() ||
      !std::isfinite(value))
    return Error{Errc::malformed_payload, "payload is not a finite number: " + msg.payload};

  auto descriptor = directory.resolve(device, sensor);
  if (!descriptor) {
    if (!opts.auto_register)
      return Error{Errc::unknown_resource, "unregistered pair: " + device + "/" + sensor};
    model::ResourceDescriptor d;
    d.device = device;
    d.sensor = sensor;
    d.kind = model::ResourceKind::Environmental;
    auto id = directory.register_resource(d);
    if (!id.ok()) return id.error();
    descriptor = directory.find(id.value());
  }

  Reading r;
  r.resource_id = descriptor->resource_id;
  r.device = device;
  r.sensor = sensor;
  r.value = value;
  r.timestamp = ts;
  return r;
}

BusMessage format_bus_message(const Reading& r) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), r.value);
  BusMessage msg;
  msg.topic = r.device + "/" + r.sensor;
  msg.payload.assign(buf, res.ptr);
  msg.payload += "@" + std::to_string(r.timestamp);
  return msg;
}

std::string to_line(const BusMessage& msg) { return msg.topic + "\t" + msg.payload; }

std::optional<BusMessage> from_line(const std::string& line) {
  std::size_t tab = line.find('\t');
  if (tab == std::string::npos || tab == 0) return std::nullopt;
  BusMessage msg;
  msg.topic = line.substr(0, tab);
  msg.payload = line.substr(tab + 1);
  if (!msg.payload.empty() && msg.payload.back() == '\r') msg.payload.pop_back();
  return msg;
}

Status SubmitQueue::try_push(Reading r) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return Error{Errc::sink_failure, "queue closed"};
    if (q_.size() >= capacity_) return Error{Errc::backpressure, "submit queue full"};
    q_.push_back(std::move(r));
  }
  cv_.notify_one();
  return Status::success();
}

std::optional<Reading> SubmitQueue::pop() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return closed_ || !q_.empty(); });
  if (q_.empty()) return std::nullopt;
  Reading r = std::move(q_.front());
  q_.pop_front();
  return r;
}

void SubmitQueue::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool SubmitQueue::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::size_t SubmitQueue::size() const {
  std::lock_guard lock(mu_);
  return q_.size();
}

Status forward(Reading r, SubmitQueue& sink, const ForwardPolicy& policy) {
  int backoff_us = policy.initial_backoff_us;
  for (int attempt = 0;; ++attempt) {
    Status st = sink.try_push(r);
    if (st.ok() || st.code() != Errc::backpressure) return st;
    if (attempt + 1 >= policy.max_attempts) return st;
    std::this_thread::sleep_for(std::chrono::microseconds(backoff_us));
    backoff_us *= 2;
  }
}

Result<std::vector<Reading>> poll_cycle(PollSource& src, const FetchFn& fetch) {
  auto fetched = fetch(src.cursor);
  if (!fetched.ok())
    return Error{Errc::source_unavailable,
                 "poll source " + src.source_id + ": " + fetched.error().message};
  std::vector<Reading> fresh;
  for (auto& r : fetched.value())
    if (r.timestamp > src.cursor) fresh.push_back(std::move(r));
  std::stable_sort(fresh.begin(), fresh.end(),
                   [](const Reading& a, const Reading& b) { return a.timestamp < b.timestamp; });
  if (!fresh.empty()) src.cursor = fresh.back().timestamp;
  return fresh;
}

}  // namespace schoolsense::ingest
