#pragma once

#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <set>
#include <unordered_map>
#include <vector>

#include "common/result.hpp"
#include "query/directory.hpp"
#include "store/summary_store.hpp"

namespace schoolsense::query {

struct QueryRequest {
  model::ResourceId resource_id;
  model::Granularity granularity = model::Granularity::Day;
  model::Millis from = 0;
  model::Millis to = 0;
  // empty set means all fields
  std::set<std::string> fields;
};

struct HistoricalResult {
  std::vector<model::IntervalSummary> rows;
  double latency_ms = 0.0;
};

// Real-time delivery queue. Updates matching the filter arrive exactly once
// in per-resource interval order; when the queue overflows the oldest
// undelivered update is dropped and counted.
class Subscription {
 public:
  explicit Subscription(std::size_t capacity) : capacity_(capacity) {}

  std::optional<model::IntervalSummary> poll(int timeout_ms);
  std::uint64_t dropped() const;

 private:
  friend class Dispatcher;
  void deliver(const model::IntervalSummary& s);
  void close();

  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<model::IntervalSummary> q_;
  std::uint64_t dropped_ = 0;
  bool closed_ = false;
};

class Dispatcher {
 public:
  // Empty filter subscribes to every resource.
  std::shared_ptr<Subscription> subscribe(std::vector<model::ResourceId> filter,
                                          std::size_t capacity = 1024);
  void unsubscribe(const std::shared_ptr<Subscription>& sub);
  void publish(const model::IntervalSummary& s);
  void close_all();

 private:
  struct Entry {
    std::shared_ptr<Subscription> sub;
    std::set<model::ResourceId> filter;  // empty = all
  };
  std::mutex mu_;
  std::vector<Entry> entries_;
};

struct QueryServiceConfig {
  model::Millis max_span_ms = 5LL * 366 * 24 * 3600 * 1000;  // ~5 years
};

// Historical Data API over the summary store. Every call's service latency
// is measured and kept for the acceptance suite.
class QueryService {
 public:
  QueryService(const Directory& directory, const store::SummaryStore& summaries,
               QueryServiceConfig cfg = {});

  Result<HistoricalResult> historical(const QueryRequest& q) const;
  std::vector<double> latency_log() const;

 private:
  const Directory& directory_;
  const store::SummaryStore& summaries_;
  QueryServiceConfig cfg_;
  mutable std::mutex mu_;
  mutable std::vector<double> latencies_ms_;
};

// Static API-key allow-list: key -> allowed resource ids ("*" allows all).
class Authorizer {
 public:
  static Result<Authorizer> load_file(const std::string& path);
  static Result<Authorizer> parse(const std::string& json_text);
  Authorizer() = default;  // empty table: deny everything

  bool allow(const std::string& api_key, const model::ResourceId& resource) const;

 private:
  std::unordered_map<std::string, std::set<std::string>> keys_;
};

}  // namespace schoolsense::query
