#pragma once

#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "common/result.hpp"
#include "platform.hpp"

namespace schoolsense::query {

struct HttpApiConfig {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks an ephemeral port
  std::optional<Authorizer> auth;  // absent: open access
};

// Local HTTP facade over the Directory, Historical and Real-time APIs:
//   GET  /directory                 list resources
//   POST /directory                 register one resource (JSON descriptor)
//   GET  /historical?resource=&granularity=&from=&to=[&fields=]
//   GET  /subscribe?resources=a,b   NDJSON stream of summary updates
// Authenticated with the X-API-Key header when a key table is configured.
class HttpApi {
 public:
  HttpApi(Platform& platform, HttpApiConfig cfg);
  ~HttpApi();

  Status start();
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Platform& platform_;
  HttpApiConfig cfg_;
  int port_ = 0;
};

// Shared JSON renderings (the CLI uses them too).
std::string summaries_to_json(const std::vector<model::IntervalSummary>& rows,
                              const std::set<std::string>& fields, double latency_ms);
std::string summaries_to_csv(const std::vector<model::IntervalSummary>& rows,
                             const std::set<std::string>& fields);
std::string descriptor_to_json(const model::ResourceDescriptor& d);
Result<model::ResourceDescriptor> descriptor_from_json(const std::string& text);

}  // namespace schoolsense::query
