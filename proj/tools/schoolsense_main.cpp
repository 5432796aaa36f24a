// schoolsense command-line front end. Talks to the platform exclusively
// through the shared library's C interface.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "schoolsense/schoolsense.h"

namespace {

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop.store(true); }

int die(const char* what, ss_status status) {
  std::fprintf(stderr, "error: %s: %s: %s\n", what, ss_status_name(status), ss_last_error());
  return 1;
}

int64_t parse_time_or_exit(const std::string& text, const char* flag) {
  int64_t ms = 0;
  if (ss_parse_time(text.c_str(), &ms) != SS_OK) {
    std::fprintf(stderr, "error: bad %s value: %s\n", flag, text.c_str());
    std::exit(1);
  }
  return ms;
}

// Reports are written atomically: temp file in the target directory, then
// rename over the destination.
bool write_report(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::fwrite(content.data(), 1, content.size(), stdout);
    if (!content.empty() && content.back() != '\n') std::fputc('\n', stdout);
    return true;
  }
  std::filesystem::path dest(path);
  std::filesystem::path tmp = dest;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) return false;
    out << content;
    if (!content.empty() && content.back() != '\n') out << '\n';
    if (!out) return false;
  }
  std::error_code ec;
  std::filesystem::rename(tmp, dest, ec);
  return !ec;
}

struct PlatformHandle {
  ss_platform* p = nullptr;
  ~PlatformHandle() {
    if (p) ss_platform_close(p);
  }
};

struct CString {
  char* s = nullptr;
  ~CString() {
    if (s) ss_string_free(s);
  }
};

std::string default_store() {
  const char* env = std::getenv("SCHOOLSENSE_STORE");
  return env && *env ? env : "";
}

int open_platform(PlatformHandle& h, const std::string& store, const std::string& topology,
                  const std::string& options) {
  if (store.empty()) {
    std::fprintf(stderr, "error: store required (flag --store or SCHOOLSENSE_STORE)\n");
    return 1;
  }
  ss_status st = ss_platform_open(store.c_str(), topology.empty() ? nullptr : topology.c_str(),
                                  options.empty() ? nullptr : options.c_str(), &h.p);
  if (st != SS_OK) return die("open platform", st);
  return 0;
}

void wait_for_stop(double duration_s) {
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(duration_s));
  while (!g_stop.load()) {
    if (duration_s > 0 && std::chrono::steady_clock::now() >= deadline) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);

  CLI::App app{"schoolsense — streaming aggregation and analytics for school sensor fleets"};
  app.require_subcommand(1);

  std::string store = default_store();
  std::string topology, out_path, from_s, to_s;
  bool as_csv = false, as_json = false;

  // --- version ---
  app.add_subcommand("version", "print the library version");

  // --- engine / ingest (service mode) ---
  auto* engine_cmd = app.add_subcommand("engine", "run the full pipeline service");
  std::string listen = "127.0.0.1:7070", http_addr, keys_path;
  bool instrument = false, auto_register = false;
  double duration_s = 0.0;
  engine_cmd->add_option("--topology", topology, "topology config file")->required();
  engine_cmd->add_option("--store", store, "store directory");
  engine_cmd->add_option("--listen", listen, "ingest line-protocol address (host:port)");
  engine_cmd->add_option("--http", http_addr, "HTTP Data API address (host:port)");
  engine_cmd->add_option("--keys", keys_path, "API key table (JSON)");
  engine_cmd->add_flag("--instrument", instrument, "record per-event latency");
  engine_cmd->add_flag("--auto-register", auto_register, "register unknown pairs on sight");
  engine_cmd->add_option("--duration", duration_s, "stop after this many seconds (0 = run)");

  auto* ingest_cmd = app.add_subcommand("ingest", "run the message-bus mapper service");
  ingest_cmd->add_option("--listen", listen, "line-protocol address")->required();
  ingest_cmd->add_option("--topology", topology, "topology config file")->required();
  ingest_cmd->add_option("--store", store, "store directory");
  ingest_cmd->add_flag("--auto-register", auto_register, "register unknown pairs on sight");
  ingest_cmd->add_option("--duration", duration_s, "stop after this many seconds (0 = run)");

  // --- poll ---
  auto* poll_cmd = app.add_subcommand("poll", "run the polling mapper");
  std::string source_path;
  int period_s = 300, cycles = 0;
  poll_cmd->add_option("--source", source_path, "poll source config (JSON)")->required();
  poll_cmd->add_option("--period", period_s, "poll period seconds");
  poll_cmd->add_option("--cycles", cycles, "number of cycles (0 = until drained)");
  poll_cmd->add_option("--topology", topology, "topology config file")->required();
  poll_cmd->add_option("--store", store, "store directory");

  // --- query ---
  auto* query_cmd = app.add_subcommand("query", "historical summaries");
  std::string resource, granularity = "day", fields;
  query_cmd->add_option("--resource", resource, "resource id")->required();
  query_cmd->add_option("--granularity", granularity, "5min|hour|day|month|year");
  query_cmd->add_option("--from", from_s, "range start (ISO-8601 UTC or epoch ms)")->required();
  query_cmd->add_option("--to", to_s, "range end, exclusive")->required();
  query_cmd->add_option("--fields", fields, "comma list: avg,min,max,count,sum,energy");
  query_cmd->add_flag("--csv", as_csv, "CSV output");
  query_cmd->add_flag("--json", as_json, "JSON output (default)");
  query_cmd->add_option("--topology", topology, "topology config file")->required();
  query_cmd->add_option("--store", store, "store directory");
  query_cmd->add_option("--out", out_path, "write the report here instead of stdout");

  // --- analyze ---
  auto* analyze_cmd = app.add_subcommand("analyze", "data quality and comfort analytics");
  std::string kind, site;
  double window_hours = 0.0, threshold = 0.0;
  analyze_cmd->add_option("kind", kind, "outliers|availability|matrix|comfort|performance|events")
      ->required();
  analyze_cmd->add_option("--topology", topology, "topology config file")->required();
  analyze_cmd->add_option("--store", store, "store directory");
  analyze_cmd->add_option("--from", from_s, "period start")->required();
  analyze_cmd->add_option("--to", to_s, "period end, exclusive")->required();
  analyze_cmd->add_option("--site", site, "site id (comfort/performance)");
  analyze_cmd->add_option("--resource", resource, "resource id (outliers/events)");
  analyze_cmd->add_option("--window-hours", window_hours, "screen window span");
  analyze_cmd->add_option("--threshold", threshold, "event/flag threshold, degrees C");
  analyze_cmd->add_option("--out", out_path, "report file (.json or .csv)");
  analyze_cmd->add_flag("--csv", as_csv, "CSV output");
  analyze_cmd->add_flag("--json", as_json, "JSON output");

  // --- replay ---
  auto* replay_cmd = app.add_subcommand("replay", "re-deliver stored readings");
  std::string sink, speed_s = "max";
  replay_cmd->add_option("--from", from_s, "range start")->required();
  replay_cmd->add_option("--to", to_s, "range end, exclusive")->required();
  replay_cmd->add_option("--speed", speed_s, "pace multiplier or 'max'");
  replay_cmd->add_option("--sink", sink, "host:port for the line protocol, or '-' for stdout")
      ->required();
  replay_cmd->add_option("--store", store, "store directory");
  replay_cmd->add_option("--topology", topology, "topology config file");

  // --- simulate ---
  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic fleet stream");
  std::string config_path, sim_out = "sim-out";
  std::uint64_t seed = 0;
  sim_cmd->add_option("--config", config_path, "fleet config (JSON)")->required();
  sim_cmd->add_option("--seed", seed, "override the config seed");
  sim_cmd->add_option("--sink", sink, "dir | pipeline | host:port")->required();
  sim_cmd->add_option("--out", sim_out, "output directory (topology, ground truth, stream)");
  sim_cmd->add_option("--store", store, "store directory (pipeline sink)");

  // --- bench ---
  auto* bench_cmd = app.add_subcommand("bench", "drive the engine at a target rate");
  double rate = 500.0, bench_duration = 60.0;
  bench_cmd->add_option("--rate", rate, "messages per second");
  bench_cmd->add_option("--duration", bench_duration, "seconds");
  bench_cmd->add_option("--store", store, "store directory (default: temp)");
  bench_cmd->add_option("--out", out_path, "write the JSON report here");

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand("version")) {
    std::printf("schoolsense %s\n", ss_version());
    return 0;
  }

  if (app.got_subcommand("engine") || app.got_subcommand("ingest")) {
    bool with_http = app.got_subcommand("engine") && !http_addr.empty();
    nlohmann::json opts;
    opts["instrument"] = instrument;
    opts["auto_register"] = auto_register;
    PlatformHandle h;
    if (int rc = open_platform(h, store, topology, opts.dump())) return rc;
    int port = 0;
    ss_status st = ss_service_start(h.p, listen.c_str(), &port);
    if (st != SS_OK) return die("start service", st);
    std::fprintf(stderr, "listening for bus lines on port %d\n", port);
    if (with_http) {
      std::size_t colon = http_addr.rfind(':');
      std::string host = colon == std::string::npos ? http_addr : http_addr.substr(0, colon);
      int hport = colon == std::string::npos ? 0 : std::atoi(http_addr.c_str() + colon + 1);
      int bound = 0;
      st = ss_http_start(h.p, host.c_str(), hport, keys_path.empty() ? nullptr : keys_path.c_str(),
                         &bound);
      if (st != SS_OK) return die("start http", st);
      std::fprintf(stderr, "HTTP Data API on port %d\n", bound);
    }
    wait_for_stop(duration_s);
    ss_service_stop(h.p);
    if (with_http) ss_http_stop(h.p);
    return 0;
  }

  if (app.got_subcommand("poll")) {
    std::ifstream in(source_path);
    if (!in) {
      std::fprintf(stderr, "error: cannot open %s\n", source_path.c_str());
      return 1;
    }
    std::string cfg((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    PlatformHandle h;
    if (int rc = open_platform(h, store, topology, "")) return rc;
    CString report;
    ss_status st = ss_poll_run(h.p, cfg.c_str(), period_s, cycles, &report.s);
    if (st != SS_OK) return die("poll", st);
    std::printf("%s\n", report.s);
    return 0;
  }

  if (app.got_subcommand("query")) {
    PlatformHandle h;
    if (int rc = open_platform(h, store, topology, "")) return rc;
    CString out;
    double latency = 0.0;
    ss_status st = ss_query_historical(h.p, resource.c_str(), granularity.c_str(),
                                       parse_time_or_exit(from_s, "--from"),
                                       parse_time_or_exit(to_s, "--to"),
                                       fields.empty() ? nullptr : fields.c_str(),
                                       as_csv ? "csv" : "json", &out.s, &latency);
    if (st != SS_OK) return die("query", st);
    if (!write_report(out_path, out.s)) {
      std::fprintf(stderr, "error: cannot write %s\n", out_path.c_str());
      return 1;
    }
    return 0;
  }

  if (app.got_subcommand("analyze")) {
    nlohmann::json opts;
    opts["from"] = parse_time_or_exit(from_s, "--from");
    opts["to"] = parse_time_or_exit(to_s, "--to");
    if (!site.empty()) opts["site"] = site;
    if (!resource.empty()) opts["resource"] = resource;
    if (window_hours > 0) opts["window_hours"] = window_hours;
    if (threshold > 0) {
      opts["threshold_c"] = threshold;
      opts["flag_threshold_c"] = threshold;
    }
    std::string format = as_csv ? "csv" : as_json ? "json" : "";
    if (format.empty())
      format = out_path.size() > 4 && out_path.substr(out_path.size() - 4) == ".csv" ? "csv"
                                                                                     : "json";
    PlatformHandle h;
    if (int rc = open_platform(h, store, topology, "")) return rc;
    CString out;
    ss_status st = ss_analyze(h.p, kind.c_str(), opts.dump().c_str(), format.c_str(), &out.s);
    if (st != SS_OK) return die("analyze", st);
    if (!write_report(out_path, out.s)) {
      std::fprintf(stderr, "error: cannot write %s\n", out_path.c_str());
      return 1;
    }
    return 0;
  }

  if (app.got_subcommand("replay")) {
    double speed = speed_s == "max" || speed_s == "inf" ? 0.0 : std::atof(speed_s.c_str());
    if (speed < 0 || (speed == 0.0 && speed_s != "max" && speed_s != "inf")) {
      std::fprintf(stderr, "error: bad --speed %s\n", speed_s.c_str());
      return 1;
    }
    PlatformHandle h;
    if (int rc = open_platform(h, store, topology, "")) return rc;
    CString report;
    ss_status st = ss_replay(h.p, parse_time_or_exit(from_s, "--from"),
                             parse_time_or_exit(to_s, "--to"), speed, sink.c_str(), &report.s);
    if (st != SS_OK) return die("replay", st);
    std::fprintf(stderr, "%s\n", report.s);
    return 0;
  }

  if (app.got_subcommand("simulate")) {
    std::ifstream in(config_path);
    if (!in) {
      std::fprintf(stderr, "error: cannot open %s\n", config_path.c_str());
      return 1;
    }
    std::string cfg_text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (seed != 0) {
      auto j = nlohmann::json::parse(cfg_text, nullptr, false);
      if (j.is_discarded()) {
        std::fprintf(stderr, "error: %s is not valid JSON\n", config_path.c_str());
        return 1;
      }
      j["seed"] = seed;
      cfg_text = j.dump();
    }
    PlatformHandle h;
    if (sink == "pipeline") {
      nlohmann::json opts;
      opts["auto_register"] = false;
      if (int rc = open_platform(h, store, "", opts.dump())) return rc;
    }
    CString report;
    ss_status st = ss_simulate(h.p, cfg_text.c_str(), sink.c_str(), sim_out.c_str(), &report.s);
    if (st != SS_OK) return die("simulate", st);
    std::printf("%s\n", report.s);
    return 0;
  }

  if (app.got_subcommand("bench")) {
    std::string bench_store = store;
    std::filesystem::path tmp;
    if (bench_store.empty()) {
      tmp = std::filesystem::temp_directory_path() /
            ("schoolsense-bench-" + std::to_string(::getpid()));
      bench_store = tmp.string();
    }
    nlohmann::json opts;
    opts["instrument"] = true;
    PlatformHandle h;
    if (int rc = open_platform(h, bench_store, "", opts.dump())) return rc;
    nlohmann::json bench_opts;
    bench_opts["rate"] = rate;
    bench_opts["duration_s"] = bench_duration;
    CString report;
    ss_status st = ss_bench(h.p, bench_opts.dump().c_str(), &report.s);
    if (st != SS_OK) return die("bench", st);
    const std::string report_text = report.s;
    if (!out_path.empty() && !write_report(out_path, report_text)) {
      std::fprintf(stderr, "error: cannot write %s\n", out_path.c_str());
      return 1;
    }
    std::printf("%s\n", report_text.c_str());
    ss_platform_close(h.p);
    h.p = nullptr;
    if (!tmp.empty()) std::filesystem::remove_all(tmp);
    // the capacity gate: nonzero exit when the target rate was not met
    auto j = nlohmann::json::parse(report_text, nullptr, false);
    if (!j.is_discarded() && rate > 0) {
      double throughput = j.value("throughput_msg_s", 0.0);
      std::uint64_t drops = j.value("drops", std::uint64_t(0));
      if (drops > 0 || throughput < rate * 0.98) {
        std::fprintf(stderr, "bench: target rate not sustained\n");
        return 3;
      }
    }
    return 0;
  }

  std::fprintf(stderr, "error: unknown subcommand\n");
  return 2;
}
