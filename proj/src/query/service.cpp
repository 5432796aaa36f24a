#include "query/service.hpp"

#include <chrono>
#include <fstream>

#include <json.hpp>

namespace schoolsense::query {

using model::IntervalSummary;

std::optional<IntervalSummary> Subscription::poll(int timeout_ms) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms),
               [&] { return closed_ || !q_.empty(); });
  if (q_.empty()) return std::nullopt;
  IntervalSummary s = std::move(q_.front());
  q_.pop_front();
  return s;
}

std::uint64_t Subscription::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

void Subscription::deliver(const IntervalSummary& s) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    if (q_.size() >= capacity_) {
      q_.pop_front();  // oldest undelivered gives way
      ++dropped_;
    }
    q_.push_back(s);
  }
  cv_.notify_one();
}

void Subscription::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::shared_ptr<Subscription> Dispatcher::subscribe(std::vector<model::ResourceId> filter,
                                                    std::size_t capacity) {
  auto sub = std::make_shared<Subscription>(capacity);
  Entry e;
  e.sub = sub;
  e.filter.insert(filter.begin(), filter.end());
  std::lock_guard lock(mu_);
  entries_.push_back(std::move(e));
  return sub;
}

void Dispatcher::unsubscribe(const std::shared_ptr<Subscription>& sub) {
  std::lock_guard lock(mu_);
  for (auto it = entries_.begin(); it != entries_.end(); ++it) {
    if (it->sub == sub) {
      it->sub->close();
      entries_.erase(it);
      return;
    }
  }
}

void Dispatcher::publish(const IntervalSummary& s) {
  std::lock_guard lock(mu_);
  for (auto& e : entries_)
    if (e.filter.empty() || e.filter.count(s.resource_id)) e.sub->deliver(s);
}

void Dispatcher::close_all() {
  std::lock_guard lock(mu_);
  for (auto& e : entries_) e.sub->close();
  entries_.clear();
}

QueryService::QueryService(const Directory& directory, const store::SummaryStore& summaries,
                           QueryServiceConfig cfg)
    : directory_(directory), summaries_(summaries), cfg_(cfg) {}

Result<HistoricalResult> QueryService::historical(const QueryRequest& q) const {
  if (q.from >= q.to) return Error{Errc::invalid_argument, "from must precede to"};
  if (q.to - q.from > cfg_.max_span_ms)
    return Error{Errc::range_too_large, "range exceeds the configured maximum span"};
  if (!directory_.find(q.resource_id))
    return Error{Errc::unknown_resource, "unknown resource: " + q.resource_id};

  const auto t0 = std::chrono::steady_clock::now();
  HistoricalResult out;
  out.rows = summaries_.get_range(q.resource_id, q.granularity, q.from, q.to);
  const auto t1 = std::chrono::steady_clock::now();
  out.latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  {
    std::lock_guard lock(mu_);
    latencies_ms_.push_back(out.latency_ms);
  }
  return out;
}

std::vector<double> QueryService::latency_log() const {
  std::lock_guard lock(mu_);
  return latencies_ms_;
}

Result<Authorizer> Authorizer::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return Error{Errc::io_failure, "cannot open key file: " + path};
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(text);
}

Result<Authorizer> Authorizer::parse(const std::string& json_text) {
  auto root = nlohmann::json::parse(json_text, nullptr, false);
  if (root.is_discarded() || !root.contains("keys") || !root["keys"].is_array())
    return Error{Errc::invalid_config, "key file needs a keys array"};
  Authorizer a;
  for (const auto& jk : root["keys"]) {
    std::string key = jk.value("key", "");
    if (key.empty()) return Error{Errc::invalid_config, "entry without key"};
    std::set<std::string> allowed;
    if (jk.contains("allow"))
      for (const auto& r : jk["allow"]) allowed.insert(r.get<std::string>());
    a.keys_[key] = std::move(allowed);
  }
  return a;
}

bool Authorizer::allow(const std::string& api_key, const model::ResourceId& resource) const {
  auto it = keys_.find(api_key);
  if (it == keys_.end()) return false;  // unknown key -> deny
  return it->second.count("*") || it->second.count(resource);
}

}  // namespace schoolsense::query
