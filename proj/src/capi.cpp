#include "schoolsense/schoolsense.h"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <thread>

#include <json.hpp>

#include "analytics/run.hpp"
#include "fleetsim/bench.hpp"
#include "fleetsim/fleet.hpp"
#include "platform.hpp"
#include "query/http_api.hpp"

using namespace schoolsense;

namespace {

thread_local std::string g_last_error;

ss_status to_status(Errc c) { return ss_status(int(c)); }

ss_status fail(const Error& e) {
  g_last_error = e.message;
  return to_status(e.code);
}

ss_status fail(Errc code, std::string message) {
  g_last_error = std::move(message);
  return to_status(code);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

model::Millis wall_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

struct ss_platform {
  std::unique_ptr<Platform> platform;
  std::unique_ptr<query::HttpApi> http;
};

struct ss_subscription {
  std::shared_ptr<query::Subscription> sub;
};

extern "C" {

const char* ss_version(void) { return "0.1.0"; }

const char* ss_status_name(ss_status status) { return errc_name(Errc(int(status))); }

const char* ss_last_error(void) { return g_last_error.c_str(); }

void ss_string_free(char* s) { std::free(s); }

ss_status ss_parse_time(const char* text, int64_t* ms_out) {
  if (!text || !ms_out) return fail(Errc::invalid_argument, "text and out required");
  auto t = model::parse_time(text);
  if (!t) return fail(Errc::invalid_argument, std::string("unparseable time: ") + text);
  *ms_out = *t;
  return SS_OK;
}

ss_status ss_platform_open(const char* store_dir, const char* topology_path,
                           const char* options_json, ss_platform** out) {
  if (!store_dir || !out) return fail(Errc::invalid_argument, "store_dir and out required");
  PlatformConfig cfg;
  cfg.store_dir = store_dir;
  if (topology_path) cfg.topology_path = topology_path;
  if (options_json && *options_json) {
    auto j = nlohmann::json::parse(options_json, nullptr, false);
    if (j.is_discarded()) return fail(Errc::invalid_argument, "options are not valid JSON");
    cfg.auto_register = j.value("auto_register", false);
    cfg.instrument = j.value("instrument", false);
    cfg.retained_slots = j.value("retained_slots", 48);
    cfg.nominal_voltage = j.value("nominal_voltage", 230.0);
    cfg.queue_capacity = j.value("queue_capacity", std::size_t(8192));
  }
  auto p = Platform::open(cfg);
  if (!p.ok()) return fail(p.error());
  auto* handle = new ss_platform;
  handle->platform = p.take();
  *out = handle;
  return SS_OK;
}

void ss_platform_close(ss_platform* p) {
  if (!p) return;
  if (p->http) p->http->stop();
  delete p;
}

ss_status ss_register_resource(ss_platform* p, const char* descriptor_json,
                               char** resource_id_out) {
  if (!p || !descriptor_json) return fail(Errc::invalid_argument, "handle and json required");
  auto d = query::descriptor_from_json(descriptor_json);
  if (!d.ok()) return fail(d.error());
  auto id = p->platform->directory().register_resource(d.value());
  if (!id.ok()) return fail(id.error());
  p->platform->engine().register_resource(
      id.value(), model::aggregation_for(d.value().kind, d.value().sensor));
  if (resource_id_out) *resource_id_out = dup_string(id.value());
  return SS_OK;
}

ss_status ss_list_resources(ss_platform* p, char** json_out) {
  if (!p || !json_out) return fail(Errc::invalid_argument, "handle and out required");
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& d : p->platform->directory().list_resources())
    arr.push_back(nlohmann::json::parse(query::descriptor_to_json(d)));
  *json_out = dup_string(arr.dump(2));
  return SS_OK;
}

ss_status ss_submit_bus_message(ss_platform* p, const char* topic, const char* payload,
                                int64_t now_ms) {
  if (!p || !topic || !payload)
    return fail(Errc::invalid_argument, "handle, topic, payload required");
  ingest::BusMessage msg{topic, payload};
  auto st = p->platform->ingest_message_sync(msg, now_ms > 0 ? now_ms : wall_now_ms());
  if (!st.ok()) return fail(st.error());
  return SS_OK;
}

ss_status ss_submit_line(ss_platform* p, const char* line, int64_t now_ms) {
  if (!p || !line) return fail(Errc::invalid_argument, "handle and line required");
  auto msg = ingest::from_line(line);
  if (!msg) return fail(Errc::malformed_topic, "line is not <topic>\\t<payload>");
  return ss_submit_bus_message(p, msg->topic.c_str(), msg->payload.c_str(), now_ms);
}

ss_status ss_service_start(ss_platform* p, const char* listen_addr, int* bound_port_out) {
  if (!p || !listen_addr) return fail(Errc::invalid_argument, "handle and addr required");
  p->platform->start_worker();
  auto st = p->platform->start_listener(listen_addr);
  if (!st.ok()) return fail(st.error());
  if (bound_port_out) *bound_port_out = p->platform->listener_port();
  return SS_OK;
}

ss_status ss_service_stop(ss_platform* p) {
  if (!p) return fail(Errc::invalid_argument, "null handle");
  p->platform->stop_listener();
  p->platform->stop_worker();
  p->platform->flush();
  return SS_OK;
}

ss_status ss_poll_run(ss_platform* p, const char* source_json, int period_s, int max_cycles,
                      char** report_json_out) {
  if (!p || !source_json) return fail(Errc::invalid_argument, "handle and source required");
  auto j = nlohmann::json::parse(source_json, nullptr, false);
  if (j.is_discarded()) return fail(Errc::invalid_config, "source config is not valid JSON");
  std::string path = j.value("path", "");
  if (path.empty()) return fail(Errc::invalid_config, "source config needs a path");

  ingest::PollSource src;
  src.source_id = j.value("source_id", path);
  src.poll_period_s = period_s > 0 ? period_s : 300;

  auto fetch = [&](model::Millis) -> Result<std::vector<model::Reading>> {
    std::ifstream in(path);
    if (!in) return Error{Errc::source_unavailable, "cannot open " + path};
    std::vector<model::Reading> out;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto msg = ingest::from_line(line);
      if (!msg) continue;
      auto r = ingest::parse_bus_message(*msg, wall_now_ms(), p->platform->directory(), {});
      if (r.ok()) out.push_back(r.take());
    }
    return out;
  };

  std::uint64_t total = 0, cycles = 0, failures = 0;
  for (int c = 0; max_cycles == 0 || c < max_cycles; ++c) {
    auto batch = ingest::poll_cycle(src, fetch);
    ++cycles;
    if (!batch.ok()) {
      ++failures;  // cursor untouched; retry next cycle
    } else {
      for (const auto& r : batch.value()) p->platform->submit_reading(r);
      total += batch.value().size();
      if (max_cycles == 0 && batch.value().empty()) break;
    }
    if (max_cycles != 1 && (max_cycles == 0 || c + 1 < max_cycles))
      std::this_thread::sleep_for(std::chrono::seconds(src.poll_period_s));
  }
  if (report_json_out) {
    nlohmann::json out;
    out["source_id"] = src.source_id;
    out["cycles"] = cycles;
    out["ingested"] = total;
    out["failures"] = failures;
    out["cursor"] = src.cursor;
    *report_json_out = dup_string(out.dump(2));
  }
  return SS_OK;
}

ss_status ss_http_start(ss_platform* p, const char* host, int port, const char* keys_path,
                        int* bound_port_out) {
  if (!p) return fail(Errc::invalid_argument, "null handle");
  query::HttpApiConfig cfg;
  cfg.host = host && *host ? host : "127.0.0.1";
  cfg.port = port;
  if (keys_path && *keys_path) {
    auto auth = query::Authorizer::load_file(keys_path);
    if (!auth.ok()) return fail(auth.error());
    cfg.auth = auth.take();
  }
  p->http = std::make_unique<query::HttpApi>(*p->platform, cfg);
  auto st = p->http->start();
  if (!st.ok()) {
    p->http.reset();
    return fail(st.error());
  }
  if (bound_port_out) *bound_port_out = p->http->port();
  return SS_OK;
}

ss_status ss_http_stop(ss_platform* p) {
  if (!p) return fail(Errc::invalid_argument, "null handle");
  if (p->http) {
    p->http->stop();
    p->http.reset();
  }
  return SS_OK;
}

ss_status ss_flush(ss_platform* p) {
  if (!p) return fail(Errc::invalid_argument, "null handle");
  p->platform->flush();
  return SS_OK;
}

ss_status ss_compact(ss_platform* p) {
  if (!p) return fail(Errc::invalid_argument, "null handle");
  p->platform->summaries().compact();
  return SS_OK;
}

ss_status ss_export_summaries(ss_platform* p, char** text_out) {
  if (!p || !text_out) return fail(Errc::invalid_argument, "handle and out required");
  *text_out = dup_string(p->platform->summaries().export_canonical());
  return SS_OK;
}

ss_status ss_replay(ss_platform* p, int64_t from_ms, int64_t to_ms, double speed,
                    const char* sink_addr, char** report_json_out) {
  if (!p) return fail(Errc::invalid_argument, "null handle");
  store::ReplayOptions opts;
  opts.from = from_ms;
  opts.to = to_ms;
  opts.speed = speed;

  Result<store::ReplayReport> report = Error{Errc::internal, "unreachable"};
  if (sink_addr && std::strcmp(sink_addr, "-") == 0) {
    report = store::replay(p->platform->raw(), opts, [&](const model::Reading& r) {
      std::string line = ingest::to_line(ingest::format_bus_message(r));
      line += '\n';
      return std::fwrite(line.data(), 1, line.size(), stdout) == line.size();
    });
  } else if (sink_addr && *sink_addr) {
    ingest::LineSender sender;
    auto st = sender.connect(sink_addr);
    if (!st.ok()) return fail(st.error());
    report = store::replay(p->platform->raw(), opts, [&](const model::Reading& r) {
      return sender.send_line(ingest::to_line(ingest::format_bus_message(r))).ok();
    });
  } else {
    report = store::replay(p->platform->raw(), opts, [&](const model::Reading& r) {
      p->platform->submit_reading(r);
      return true;
    });
  }
  if (!report.ok()) return fail(report.error());
  if (report_json_out) {
    nlohmann::json j;
    j["delivered"] = report.value().delivered;
    j["wall_ms"] = report.value().wall_ms;
    *report_json_out = dup_string(j.dump(2));
  }
  return SS_OK;
}

ss_status ss_query_historical(ss_platform* p, const char* resource, const char* granularity,
                              int64_t from_ms, int64_t to_ms, const char* fields,
                              const char* format, char** out, double* latency_ms_out) {
  if (!p || !resource || !granularity || !out)
    return fail(Errc::invalid_argument, "handle, resource, granularity, out required");
  auto g = model::granularity_from_string(granularity);
  if (!g) return fail(Errc::invalid_argument, std::string("bad granularity: ") + granularity);
  query::QueryRequest q;
  q.resource_id = resource;
  q.granularity = *g;
  q.from = from_ms;
  q.to = to_ms;
  if (fields && *fields) {
    std::string fs = fields;
    std::size_t pos = 0;
    while (pos < fs.size()) {
      std::size_t comma = fs.find(',', pos);
      if (comma == std::string::npos) comma = fs.size();
      if (comma > pos) q.fields.insert(fs.substr(pos, comma - pos));
      pos = comma + 1;
    }
  }
  auto result = p->platform->query().historical(q);
  if (!result.ok()) return fail(result.error());
  std::string fmt = format && *format ? format : "json";
  if (fmt == "csv")
    *out = dup_string(query::summaries_to_csv(result.value().rows, q.fields));
  else
    *out = dup_string(
        query::summaries_to_json(result.value().rows, q.fields, result.value().latency_ms));
  if (latency_ms_out) *latency_ms_out = result.value().latency_ms;
  return SS_OK;
}

ss_status ss_subscribe(ss_platform* p, const char* resources_csv, ss_subscription** out) {
  if (!p || !out) return fail(Errc::invalid_argument, "handle and out required");
  std::vector<model::ResourceId> filter;
  if (resources_csv && *resources_csv) {
    std::string fs = resources_csv;
    std::size_t pos = 0;
    while (pos < fs.size()) {
      std::size_t comma = fs.find(',', pos);
      if (comma == std::string::npos) comma = fs.size();
      if (comma > pos) {
        std::string id = fs.substr(pos, comma - pos);
        if (!p->platform->directory().find(id))
          return fail(Errc::unknown_resource, "unknown resource: " + id);
        filter.push_back(id);
      }
      pos = comma + 1;
    }
  }
  auto* handle = new ss_subscription;
  handle->sub = p->platform->dispatcher().subscribe(std::move(filter));
  *out = handle;
  return SS_OK;
}

ss_status ss_subscription_poll(ss_subscription* s, int timeout_ms, char** json_out) {
  if (!s || !json_out) return fail(Errc::invalid_argument, "subscription and out required");
  auto update = s->sub->poll(timeout_ms);
  if (!update) return to_status(Errc::no_data);
  nlohmann::json j;
  j["resource"] = update->resource_id;
  j["granularity"] = model::to_string(update->interval.granularity);
  j["start"] = update->interval.start;
  j["avg"] = update->value.avg;
  j["min"] = update->value.min;
  j["max"] = update->value.max;
  j["count"] = update->value.count;
  if (update->value.sum) j["sum"] = *update->value.sum;
  if (update->value.energy_wh) j["energy_wh"] = *update->value.energy_wh;
  *json_out = dup_string(j.dump());
  return SS_OK;
}

uint64_t ss_subscription_dropped(ss_subscription* s) { return s ? s->sub->dropped() : 0; }

void ss_subscription_close(ss_platform* p, ss_subscription* s) {
  if (!s) return;
  if (p) p->platform->dispatcher().unsubscribe(s->sub);
  delete s;
}

ss_status ss_analyze(ss_platform* p, const char* kind, const char* options_json,
                     const char* format, char** out) {
  if (!p || !kind || !out) return fail(Errc::invalid_argument, "handle, kind, out required");
  auto result = analytics::run_analysis(*p->platform, kind, options_json ? options_json : "{}",
                                        format && *format ? format : "json");
  if (!result.ok()) return fail(result.error());
  *out = dup_string(result.value());
  return SS_OK;
}

ss_status ss_simulate(ss_platform* p, const char* config_json, const char* sink,
                      const char* out_dir, char** report_json_out) {
  if (!config_json) return fail(Errc::invalid_argument, "config required");
  auto cfg = fleetsim::parse_fleet_config(config_json);
  if (!cfg.ok()) return fail(cfg.error());
  auto topo = fleetsim::fleet_topology(cfg.value());
  if (!topo.ok()) return fail(topo.error());

  std::string sink_kind = sink && *sink ? sink : "dir";
  std::string dir = out_dir && *out_dir ? out_dir : ".";
  std::filesystem::create_directories(dir);
  auto st = model::save_topology(topo.value(), dir + "/topology.json");
  if (!st.ok()) return fail(st.error());

  Result<fleetsim::GroundTruth> gt = Error{Errc::internal, "unreachable"};
  if (sink_kind == "pipeline") {
    if (!p) return fail(Errc::invalid_argument, "pipeline sink needs a platform handle");
    // platform must already know the fleet; register on the fly
    for (const auto& site : topo.value().sites)
      for (const auto& res : site.resources) {
        p->platform->directory().register_resource(res);
        p->platform->engine().register_resource(res.resource_id,
                                                model::aggregation_for(res.kind, res.sensor));
      }
    p->platform->start_worker();
    gt = fleetsim::generate(cfg.value(), topo.value(), [&](const ingest::BusMessage& msg) {
      p->platform->ingest_message(msg, 0);
    });
  } else if (sink_kind == "dir") {
    std::ofstream stream_out(dir + "/stream.bus", std::ios::trunc);
    if (!stream_out) return fail(Errc::io_failure, "cannot write stream.bus");
    gt = fleetsim::generate(cfg.value(), topo.value(), [&](const ingest::BusMessage& msg) {
      stream_out << ingest::to_line(msg) << '\n';
    });
  } else {
    ingest::LineSender sender;
    auto conn = sender.connect(sink_kind);
    if (!conn.ok()) return fail(conn.error());
    gt = fleetsim::generate(cfg.value(), topo.value(), [&](const ingest::BusMessage& msg) {
      sender.send_line(ingest::to_line(msg));
    });
  }
  if (!gt.ok()) return fail(gt.error());

  std::ofstream gt_out(dir + "/ground_truth.json", std::ios::trunc);
  gt_out << fleetsim::ground_truth_json(gt.value()) << "\n";

  if (sink_kind == "pipeline") {
    p->platform->stop_worker();
    p->platform->flush();
  }
  if (report_json_out) {
    nlohmann::json j;
    j["emitted"] = gt.value().emitted;
    j["resources"] = topo.value().resource_count();
    j["topology"] = dir + "/topology.json";
    j["ground_truth"] = dir + "/ground_truth.json";
    *report_json_out = dup_string(j.dump(2));
  }
  return SS_OK;
}

ss_status ss_bench(ss_platform* p, const char* options_json, char** report_json_out) {
  if (!p) return fail(Errc::invalid_argument, "null handle");
  fleetsim::BenchConfig cfg;
  if (options_json && *options_json) {
    auto j = nlohmann::json::parse(options_json, nullptr, false);
    if (j.is_discarded()) return fail(Errc::invalid_argument, "options are not valid JSON");
    cfg.rate = j.value("rate", 500.0);
    cfg.duration_s = j.value("duration_s", 60.0);
    cfg.time_dilation = j.value("time_dilation", 60.0);
    cfg.seed = j.value("seed", std::uint64_t(7));
  }
  auto report = fleetsim::bench(*p->platform, cfg);
  if (!report.ok()) return fail(report.error());
  if (report_json_out) *report_json_out = dup_string(fleetsim::bench_report_json(report.value()));
  return SS_OK;
}

}  // extern "C"
