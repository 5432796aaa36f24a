/* schoolsense — streaming aggregation and analytics for building sensor
 * fleets. C interface to the shared library; all functions are
 * thread-safe unless noted. Strings returned through out-parameters are
 * heap-allocated and must be released with ss_string_free(). */

#ifndef SCHOOLSENSE_H
#define SCHOOLSENSE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SS_API __declspec(dllexport)
#else
#define SS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ss_status {
  SS_OK = 0,
  SS_ERR_INVALID_ARGUMENT = 1,
  SS_ERR_MALFORMED_TOPIC = 2,
  SS_ERR_MALFORMED_PAYLOAD = 3,
  SS_ERR_UNKNOWN_RESOURCE = 4,
  SS_ERR_DUPLICATE_RESOURCE = 5,
  SS_ERR_TOO_OLD = 6,
  SS_ERR_BACKPRESSURE = 7,
  SS_ERR_SOURCE_UNAVAILABLE = 8,
  SS_ERR_EMPTY_CHILDREN = 9,
  SS_ERR_NO_SAMPLES = 10,
  SS_ERR_EMPTY_SERIES = 11,
  SS_ERR_NO_DATA = 12,
  SS_ERR_NO_EVALUABLE_HOURS = 13,
  SS_ERR_NO_WEEKEND_DATA = 14,
  SS_ERR_RANGE_TOO_LARGE = 15,
  SS_ERR_STORAGE_FULL = 16,
  SS_ERR_IO_FAILURE = 17,
  SS_ERR_SINK_FAILURE = 18,
  SS_ERR_UNAUTHORIZED = 19,
  SS_ERR_INVALID_CONFIG = 20,
  SS_ERR_ENGINE_UNAVAILABLE = 21,
  SS_ERR_INTERNAL = 22
} ss_status;

/* Opaque handle to one platform instance: directory, raw and summary
 * stores, aggregation engine and real-time dispatcher. */
typedef struct ss_platform ss_platform;
typedef struct ss_subscription ss_subscription;

SS_API const char* ss_version(void);
SS_API const char* ss_status_name(ss_status status);

/* Detail message for the most recent failing call on this thread. */
SS_API const char* ss_last_error(void);

SS_API void ss_string_free(char* s);

/* ISO-8601 UTC ("2017-09-30T10:02:17Z", date-only) or epoch ms. */
SS_API ss_status ss_parse_time(const char* text, int64_t* ms_out);

/* options_json (may be NULL): {"auto_register":bool, "instrument":bool,
 *   "retained_slots":int, "nominal_voltage":double, "queue_capacity":int} */
SS_API ss_status ss_platform_open(const char* store_dir, const char* topology_path,
                                  const char* options_json, ss_platform** out);
SS_API void ss_platform_close(ss_platform* p);

/* --- directory ----------------------------------------------------- */
SS_API ss_status ss_register_resource(ss_platform* p, const char* descriptor_json,
                                      char** resource_id_out);
SS_API ss_status ss_list_resources(ss_platform* p, char** json_out);

/* --- ingestion ----------------------------------------------------- */
/* One bus message. now_ms stamps payloads without an @epoch_ms suffix;
 * pass 0 for the current wall clock. Runs the full pipeline (raw store,
 * aggregation, real-time fan-out) synchronously. */
SS_API ss_status ss_submit_bus_message(ss_platform* p, const char* topic, const char* payload,
                                       int64_t now_ms);
/* Line form: "<topic>\t<payload>". */
SS_API ss_status ss_submit_line(ss_platform* p, const char* line, int64_t now_ms);

/* TCP listener for the line format plus the engine worker (service mode). */
SS_API ss_status ss_service_start(ss_platform* p, const char* listen_addr,
                                  int* bound_port_out);
SS_API ss_status ss_service_stop(ss_platform* p);

/* Polling API mapper over a file-backed source. source_json:
 *   {"source_id":"...", "path":"records.bus"}
 * where the file holds "<topic>\t<value>@<epoch_ms>" lines. Each cycle
 * ingests records newer than the cursor; max_cycles 0 runs until the file
 * stops growing. Sleeps period_s between cycles when max_cycles != 1. */
SS_API ss_status ss_poll_run(ss_platform* p, const char* source_json, int period_s,
                             int max_cycles, char** report_json_out);

/* HTTP Data API (/directory, /historical, /subscribe). keys_path may be
 * NULL for open access. */
SS_API ss_status ss_http_start(ss_platform* p, const char* host, int port,
                               const char* keys_path, int* bound_port_out);
SS_API ss_status ss_http_stop(ss_platform* p);

/* --- store --------------------------------------------------------- */
SS_API ss_status ss_flush(ss_platform* p);
SS_API ss_status ss_compact(ss_platform* p);
/* Canonical sorted dump of every stored summary (determinism checks). */
SS_API ss_status ss_export_summaries(ss_platform* p, char** text_out);

/* Re-deliver stored readings. sink_addr: "host:port" for the line
 * protocol, or NULL to feed this platform's own pipeline. speed <= 0
 * replays as fast as possible. */
SS_API ss_status ss_replay(ss_platform* p, int64_t from_ms, int64_t to_ms, double speed,
                           const char* sink_addr, char** report_json_out);

/* --- query --------------------------------------------------------- */
/* granularity: 5min|hour|day|month|year; fields: comma list or NULL;
 * format: "json" or "csv". */
SS_API ss_status ss_query_historical(ss_platform* p, const char* resource,
                                     const char* granularity, int64_t from_ms, int64_t to_ms,
                                     const char* fields, const char* format, char** out,
                                     double* latency_ms_out);

SS_API ss_status ss_subscribe(ss_platform* p, const char* resources_csv,
                              ss_subscription** out);
/* Next update as a JSON object, or SS_ERR_NO_DATA after timeout_ms. */
SS_API ss_status ss_subscription_poll(ss_subscription* s, int timeout_ms, char** json_out);
SS_API uint64_t ss_subscription_dropped(ss_subscription* s);
SS_API void ss_subscription_close(ss_platform* p, ss_subscription* s);

/* --- analytics ------------------------------------------------------ */
/* kind: outliers|availability|matrix|comfort|performance|events.
 * options_json per kind (see docs/formats.md); format "json" or "csv". */
SS_API ss_status ss_analyze(ss_platform* p, const char* kind, const char* options_json,
                            const char* format, char** out);

/* --- simulation & benchmarking -------------------------------------- */
/* Writes topology.json, ground_truth.json and (for a directory sink)
 * stream.bus under out_dir; sink: "dir" writes the stream to out_dir,
 * "pipeline" feeds this platform, "host:port" sends the line protocol. */
SS_API ss_status ss_simulate(ss_platform* p, const char* config_json, const char* sink,
                             const char* out_dir, char** report_json_out);

/* options_json (may be NULL): {"rate":double, "duration_s":double,
 *   "time_dilation":double, "seed":int} */
SS_API ss_status ss_bench(ss_platform* p, const char* options_json, char** report_json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SCHOOLSENSE_H */
