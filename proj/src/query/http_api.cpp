#include "query/http_api.hpp"

#include <atomic>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace schoolsense::query {

using model::IntervalSummary;
using nlohmann::json;

namespace {

json summary_json(const IntervalSummary& s, const std::set<std::string>& fields) {
  auto want = [&](const char* f) { return fields.empty() || fields.count(f); };
  json j;
  j["resource"] = s.resource_id;
  j["granularity"] = model::to_string(s.interval.granularity);
  j["start"] = s.interval.start;
  j["start_iso"] = model::format_iso8601(s.interval.start);
  if (want("avg")) j["avg"] = s.value.avg;
  if (want("min")) j["min"] = s.value.min;
  if (want("max")) j["max"] = s.value.max;
  if (want("count")) j["count"] = s.value.count;
  if (want("sum") && s.value.sum) j["sum"] = *s.value.sum;
  if (want("energy") && s.value.energy_wh) j["energy_wh"] = *s.value.energy_wh;
  return j;
}

}  // namespace

std::string summaries_to_json(const std::vector<IntervalSummary>& rows,
                              const std::set<std::string>& fields, double latency_ms) {
  json j;
  j["count"] = rows.size();
  j["latency_ms"] = latency_ms;
  j["summaries"] = json::array();
  for (const auto& s : rows) j["summaries"].push_back(summary_json(s, fields));
  return j.dump(2);
}

std::string summaries_to_csv(const std::vector<IntervalSummary>& rows,
                             const std::set<std::string>& fields) {
  auto want = [&](const char* f) { return fields.empty() || fields.count(f); };
  std::ostringstream os;
  os << "resource,granularity,start";
  if (want("avg")) os << ",avg";
  if (want("min")) os << ",min";
  if (want("max")) os << ",max";
  if (want("count")) os << ",count";
  if (want("sum")) os << ",sum";
  if (want("energy")) os << ",energy_wh";
  os << '\n';
  for (const auto& s : rows) {
    os << s.resource_id << ',' << model::to_string(s.interval.granularity) << ','
       << model::format_iso8601(s.interval.start);
    char buf[32];
    auto put = [&](double v) {
      std::snprintf(buf, sizeof(buf), "%.10g", v);
      os << ',' << buf;
    };
    if (want("avg")) put(s.value.avg);
    if (want("min")) put(s.value.min);
    if (want("max")) put(s.value.max);
    if (want("count")) os << ',' << s.value.count;
    if (want("sum")) {
      if (s.value.sum)
        put(*s.value.sum);
      else
        os << ',';
    }
    if (want("energy")) {
      if (s.value.energy_wh)
        put(*s.value.energy_wh);
      else
        os << ',';
    }
    os << '\n';
  }
  return os.str();
}

std::string descriptor_to_json(const model::ResourceDescriptor& d) {
  json j;
  j["resource_id"] = d.resource_id;
  j["device"] = d.device;
  j["sensor"] = d.sensor;
  j["kind"] = model::to_string(d.kind);
  j["units"] = d.units;
  j["reporting_period_s"] = d.reporting_period_s;
  j["site_id"] = d.site_id;
  if (d.room_id) j["room_id"] = *d.room_id;
  return j.dump();
}

Result<model::ResourceDescriptor> descriptor_from_json(const std::string& text) {
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded()) return Error{Errc::invalid_argument, "descriptor is not valid JSON"};
  model::ResourceDescriptor d;
  d.device = j.value("device", "");
  d.sensor = j.value("sensor", "");
  if (d.device.empty() || d.sensor.empty())
    return Error{Errc::invalid_argument, "descriptor needs device and sensor"};
  d.resource_id = j.value("resource_id", "");
  auto kind = model::resource_kind_from_string(j.value("kind", "environmental"));
  if (!kind) return Error{Errc::invalid_argument, "unknown kind"};
  d.kind = *kind;
  d.units = j.value("units", "");
  d.reporting_period_s = j.value("reporting_period_s", 30);
  d.site_id = j.value("site_id", "");
  if (j.contains("room_id")) d.room_id = j["room_id"].get<std::string>();
  return d;
}

struct HttpApi::Impl {
  httplib::Server server;
  std::thread thread;
};

HttpApi::HttpApi(Platform& platform, HttpApiConfig cfg)
    : impl_(std::make_unique<Impl>()), platform_(platform), cfg_(std::move(cfg)) {}

HttpApi::~HttpApi() { stop(); }

Status HttpApi::start() {
  auto& server = impl_->server;

  auto authorized = [this](const httplib::Request& req, const std::string& resource) {
    if (!cfg_.auth) return true;
    std::string key = req.get_header_value("X-API-Key");
    return cfg_.auth->allow(key, resource);
  };

  server.Get("/directory", [this, authorized](const httplib::Request& req,
                                              httplib::Response& res) {
    if (!authorized(req, "*")) {
      res.status = 403;
      res.set_content("{\"error\":\"denied\"}", "application/json");
      return;
    }
    json j = json::array();
    for (const auto& d : platform_.directory().list_resources())
      j.push_back(json::parse(descriptor_to_json(d)));
    res.set_content(j.dump(2), "application/json");
  });

  server.Post("/directory", [this, authorized](const httplib::Request& req,
                                               httplib::Response& res) {
    if (!authorized(req, "*")) {
      res.status = 403;
      res.set_content("{\"error\":\"denied\"}", "application/json");
      return;
    }
    auto d = descriptor_from_json(req.body);
    if (!d.ok()) {
      res.status = 400;
      res.set_content(std::string("{\"error\":\"") + d.error().message + "\"}",
                      "application/json");
      return;
    }
    auto id = platform_.directory().register_resource(d.value());
    if (!id.ok()) {
      res.status = id.code() == Errc::duplicate_resource ? 409 : 400;
      res.set_content(std::string("{\"error\":\"") + id.error().message + "\"}",
                      "application/json");
      return;
    }
    platform_.engine().register_resource(
        id.value(), model::aggregation_for(d.value().kind, d.value().sensor));
    res.set_content(std::string("{\"resource_id\":\"") + id.value() + "\"}",
                    "application/json");
  });

  server.Get("/historical", [this, authorized](const httplib::Request& req,
                                               httplib::Response& res) {
    QueryRequest q;
    q.resource_id = req.get_param_value("resource");
    if (!authorized(req, q.resource_id)) {
      res.status = 403;
      res.set_content("{\"error\":\"denied\"}", "application/json");
      return;
    }
    auto g = model::granularity_from_string(req.get_param_value("granularity"));
    auto from = model::parse_time(req.get_param_value("from"));
    auto to = model::parse_time(req.get_param_value("to"));
    if (!g || !from || !to) {
      res.status = 400;
      res.set_content("{\"error\":\"need resource, granularity, from, to\"}",
                      "application/json");
      return;
    }
    q.granularity = *g;
    q.from = *from;
    q.to = *to;
    if (req.has_param("fields")) {
      std::istringstream fs(req.get_param_value("fields"));
      std::string f;
      while (std::getline(fs, f, ',')) q.fields.insert(f);
    }
    auto result = platform_.query().historical(q);
    if (!result.ok()) {
      res.status = result.code() == Errc::unknown_resource ? 404 : 400;
      res.set_content(std::string("{\"error\":\"") + result.error().message + "\"}",
                      "application/json");
      return;
    }
    res.set_content(summaries_to_json(result.value().rows, q.fields,
                                      result.value().latency_ms),
                    "application/json");
  });

  server.Get("/subscribe", [this, authorized](const httplib::Request& req,
                                              httplib::Response& res) {
    std::vector<model::ResourceId> filter;
    if (req.has_param("resources")) {
      std::istringstream fs(req.get_param_value("resources"));
      std::string f;
      while (std::getline(fs, f, ',')) {
        if (f.empty()) continue;
        if (!platform_.directory().find(f)) {
          res.status = 404;
          res.set_content("{\"error\":\"unknown resource: " + f + "\"}", "application/json");
          return;
        }
        filter.push_back(f);
      }
    }
    for (const auto& r : filter)
      if (!authorized(req, r)) {
        res.status = 403;
        res.set_content("{\"error\":\"denied\"}", "application/json");
        return;
      }
    if (filter.empty() && !authorized(req, "*")) {
      res.status = 403;
      res.set_content("{\"error\":\"denied\"}", "application/json");
      return;
    }
    auto sub = platform_.dispatcher().subscribe(filter);
    res.set_chunked_content_provider(
        "application/x-ndjson",
        [this, sub](std::size_t, httplib::DataSink& sink) {
          auto update = sub->poll(250);
          if (update) {
            std::string line = summary_json(*update, {}).dump() + "\n";
            if (!sink.write(line.data(), line.size())) {
              platform_.dispatcher().unsubscribe(sub);
              return false;
            }
          }
          return true;  // keep streaming
        },
        [this, sub](bool) { platform_.dispatcher().unsubscribe(sub); });
  });

  int port = cfg_.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(cfg_.host);
    if (port <= 0) return Error{Errc::io_failure, "cannot bind HTTP server"};
    port_ = port;
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  } else {
    port_ = port;
    impl_->thread = std::thread([this, port] { impl_->server.listen(cfg_.host, port); });
  }
  impl_->server.wait_until_ready();
  return Status::success();
}

void HttpApi::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace schoolsense::query
