#include "fleetsim/fleet.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <queue>
#include <random>

#include <json.hpp>

#include "model/timezone.hpp"

namespace schoolsense::fleetsim {

using model::CivilDate;
using model::Millis;
using model::ResourceId;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Deterministic across platforms: raw mt19937_64 draws, explicit transforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }
  double normal() {
    double u1 = uniform(), u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::mt19937_64 gen_;
};

double bell(double x, double center, double width) {
  double d = (x - center) / width;
  return std::exp(-d * d);
}

struct SignalContext {
  const SiteSpec* site = nullptr;
  const RoomSpec* room = nullptr;
  std::string sensor;
  model::TimeZone tz;
};

double orientation_gain(const std::string& o) {
  if (o == "S") return 1.0;
  if (o == "SW" || o == "SE") return 0.85;
  if (o == "W" || o == "E") return 0.55;
  return 0.25;  // northern exposures
}

// Noiseless underlying signal value at t.
double base_signal(const SignalContext& ctx, Millis t) {
  model::CivilDateTime local = ctx.tz.to_local(t);
  double h = double(local.hour) + double(local.minute) / 60.0;
  bool weekday = !model::is_weekend(local.date);
  bool school_hours = weekday && h >= 8.5 && h < 16.5;
  const double day_phase = std::sin(2.0 * 3.14159265358979323846 * (h - 9.0) / 24.0);

  const std::string& s = ctx.sensor;
  if (s == "temperature" && ctx.room) {
    if (ctx.room->profile == RoomProfile::PrefabRamp) {
      // poorly insulated prefab: tracks the sun hard, 20 -> 32 over ~8 h
      double ramp = std::clamp((h - 6.0) / 8.0, 0.0, 1.0);
      double cool = h > 14.0 ? std::clamp((h - 14.0) / 9.0, 0.0, 1.0) : 0.0;
      double v = 20.0 + 12.0 * ramp - 11.0 * cool;
      return v;
    }
    double v = 20.5 + 1.6 * day_phase;
    v += 2.0 * orientation_gain(ctx.room->orientation) * bell(h, 13.5, 3.5);
    if (school_hours) v += 0.9;  // occupancy load
    for (const auto& ev : ctx.room->window_events) {
      if (t >= ev.at && t < ev.at + ev.span_ms) {
        v += ev.delta_c * double(t - ev.at) / double(ev.span_ms);
      } else if (t >= ev.at + ev.span_ms) {
        // recover over an hour
        double rec = double(t - ev.at - ev.span_ms) / double(model::kMillisPerHour);
        if (rec < 1.0) v += ev.delta_c * (1.0 - rec);
      }
    }
    return v;
  }
  if (s == "temperature") {  // outdoor (weather station)
    return ctx.site->outdoor_base_c + 5.0 * day_phase;
  }
  if (s == "humidity") return 52.0 + 7.0 * std::sin(2.0 * 3.14159265358979323846 * (h - 4.0) / 24.0);
  if (s == "luminosity") {
    double daylight = h >= 6.0 && h <= 20.0 ? std::sin(3.14159265358979323846 * (h - 6.0) / 14.0) : 0.0;
    double gain = ctx.room ? 0.5 + 0.5 * orientation_gain(ctx.room->orientation) : 1.0;
    return 650.0 * std::max(0.0, daylight) * gain;
  }
  if (s == "noise") return school_hours ? 55.0 : 33.0;
  if (s == "wind_speed") return 2.0 + 1.2 * std::sin(2.0 * 3.14159265358979323846 * h / 24.0);
  if (s == "pressure") return 1013.0 + 2.0 * std::sin(2.0 * 3.14159265358979323846 * (h - 2.0) / 24.0);
  if (s == "current") {
    if (!weekday) return 2.0;
    double load = 2.0;
    if (h >= 7.0 && h < 9.0) load += 16.0 * (h - 7.0) / 2.0;
    else if (h >= 9.0 && h < 16.5) load += 16.0;
    else if (h >= 16.5 && h < 19.0) load += 16.0 * (19.0 - h) / 2.5;
    return load;
  }
  if (s == "precipitation") return 0.0;  // burst logic sits in the emitter
  return 0.0;
}

double noise_sigma(const std::string& sensor) {
  if (sensor == "temperature") return 0.12;
  if (sensor == "humidity") return 0.8;
  if (sensor == "luminosity") return 12.0;
  if (sensor == "noise") return 1.5;
  if (sensor == "wind_speed") return 0.5;
  if (sensor == "pressure") return 0.25;
  if (sensor == "current") return 0.25;
  return 0.1;
}

double clamp_signal(const std::string& sensor, double v) {
  if (sensor == "humidity") return std::clamp(v, 2.0, 98.0);
  if (sensor == "luminosity" || sensor == "wind_speed" || sensor == "current" ||
      sensor == "precipitation")
    return std::max(0.0, v);
  return v;
}

double inject_value(const std::string& sensor, double original) {
  if (sensor == "humidity") return 0.0;  // the classic stuck-at-zero failure
  if (sensor == "temperature") return 0.0;
  if (sensor == "current") return original * 8.0 + 200.0;  // spike well past any fence
  return 0.0;
}

std::string format_value(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

Result<model::Topology> fleet_topology(const FleetConfig& cfg) {
  model::Topology topo;
  CivilDate start_date = model::civil_from_ms(cfg.start);
  for (const auto& site : cfg.sites) {
    model::SiteTopology st;
    st.site_id = site.site_id;
    st.name = site.site_id;
    st.timezone = site.timezone;
    st.incorporated = start_date;
    int dev_counter = 0;
    auto device_id = [&]() {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%s-dev%03d", site.site_id.c_str(), dev_counter++);
      return std::string(buf);
    };
    for (const auto& room : site.rooms) {
      st.rooms.push_back({room.room_id, room.orientation});
      std::string device = device_id();
      for (const auto& sensor : room.sensors) {
        model::ResourceDescriptor d;
        d.device = device;
        d.sensor = sensor;
        d.resource_id = device + "." + sensor;
        d.kind = model::ResourceKind::Environmental;
        d.units = sensor == "temperature" ? "C" : sensor == "humidity" ? "%" : "";
        d.reporting_period_s = site.reporting_period_s;
        d.site_id = site.site_id;
        d.room_id = room.room_id;
        st.resources.push_back(d);
      }
    }
    if (site.weather_station) {
      std::string device = device_id();
      for (const char* sensor : {"temperature", "wind_speed", "precipitation"}) {
        model::ResourceDescriptor d;
        d.device = device;
        d.sensor = sensor;
        d.resource_id = device + "." + sensor;
        d.kind = model::ResourceKind::Weather;
        d.units = std::string(sensor) == "temperature" ? "C"
                  : std::string(sensor) == "wind_speed" ? "m/s"
                                                        : "mm";
        d.reporting_period_s = site.reporting_period_s;
        d.site_id = site.site_id;
        st.resources.push_back(d);
      }
    }
    if (site.atmospheric_station) {
      std::string device = device_id();
      model::ResourceDescriptor d;
      d.device = device;
      d.sensor = "pressure";
      d.resource_id = device + ".pressure";
      d.kind = model::ResourceKind::Atmospheric;
      d.units = "hPa";
      d.reporting_period_s = site.reporting_period_s;
      d.site_id = site.site_id;
      st.resources.push_back(d);
    }
    for (int m = 0; m < site.power_meters; ++m) {
      std::string device = device_id();
      model::ResourceDescriptor d;
      d.device = device;
      d.sensor = "current";
      d.resource_id = device + ".current";
      d.kind = model::ResourceKind::Power;
      d.units = "A";
      d.reporting_period_s = site.reporting_period_s;
      d.site_id = site.site_id;
      st.resources.push_back(d);
    }
    topo.sites.push_back(std::move(st));
  }
  return topo;
}

Result<GroundTruth> generate(const FleetConfig& cfg, const model::Topology& topo,
                             const EmitFn& emit) {
  if (cfg.start <= 0 || cfg.duration_ms <= 0)
    return Error{Errc::invalid_config, "fleet config needs start > 0 and duration > 0"};
  const Millis end = cfg.start + cfg.duration_ms;

  std::map<ResourceId, std::set<CivilDate>> loss;
  for (const auto& rule : cfg.loss) loss[rule.resource_id] = rule.days;

  struct Emitter {
    const model::ResourceDescriptor* res;
    SignalContext ctx;
    Millis next;
    Millis period;
    Rng rng;
    const std::set<CivilDate>* loss_days;
  };

  GroundTruth gt;
  std::vector<Emitter> emitters;
  for (const auto& site : topo.sites) {
    auto tz = model::TimeZone::load(site.timezone);
    if (!tz.ok()) return tz.error();
    const SiteSpec* spec = nullptr;
    for (const auto& s : cfg.sites)
      if (s.site_id == site.site_id) spec = &s;
    if (!spec) return Error{Errc::invalid_config, "topology site missing in config"};
    for (const auto& res : site.resources) {
      Emitter e{&res,
                SignalContext{spec, nullptr, res.sensor, tz.value()},
                0,
                Millis(res.reporting_period_s) * 1000,
                Rng(cfg.seed ^ fnv1a(res.resource_id)),
                nullptr};
      if (res.room_id)
        for (const auto& room : spec->rooms)
          if (room.room_id == *res.room_id) e.ctx.room = &room;
      e.next = cfg.start + Millis(fnv1a(res.resource_id) % std::uint64_t(e.period));
      if (auto it = loss.find(res.resource_id); it != loss.end()) e.loss_days = &it->second;
      emitters.push_back(std::move(e));
    }
  }
  if (emitters.empty()) return Error{Errc::invalid_config, "fleet has no resources"};

  // k-way merge on next emission time; ties broken by resource id so the
  // stream is the same byte sequence on every run
  auto later = [&](std::size_t a, std::size_t b) {
    if (emitters[a].next != emitters[b].next) return emitters[a].next > emitters[b].next;
    return emitters[a].res->resource_id > emitters[b].res->resource_id;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> heap(later);
  for (std::size_t i = 0; i < emitters.size(); ++i) heap.push(i);

  // precipitation bursts: per (resource, local day) an episode window
  auto rain_rate = [&](Emitter& e, Millis t) {
    CivilDate d = e.ctx.tz.local_date(t);
    // derive the day's episode from a fresh deterministic stream
    Rng day_rng(fnv1a(e.res->resource_id) ^ std::uint64_t(model::ms_from_civil(d)) ^ cfg.seed);
    if (day_rng.uniform() >= 0.3) return 0.0;  // dry day
    double start_h = 2.0 + day_rng.uniform() * 18.0;
    double len_h = 0.5 + day_rng.uniform() * 2.5;
    model::CivilDateTime local = e.ctx.tz.to_local(t);
    double h = double(local.hour) + double(local.minute) / 60.0 + double(local.second) / 3600.0;
    if (h < start_h || h > start_h + len_h) return 0.0;
    return 0.05 + 0.15 * day_rng.uniform();  // mm per report
  };

  while (!heap.empty()) {
    std::size_t i = heap.top();
    heap.pop();
    Emitter& e = emitters[i];
    if (e.next >= end) continue;
    Millis t = e.next;
    e.next += e.period;
    heap.push(i);

    // every emission consumes the same rng draws whether or not it is
    // dropped, so loss schedules do not shift the remaining stream
    double noise = e.rng.normal() * noise_sigma(e.res->sensor) * cfg.noise_scale;
    double inject_draw = e.rng.uniform();

    if (e.loss_days && e.loss_days->count(e.ctx.tz.local_date(t))) continue;

    double value;
    if (e.res->sensor == "precipitation") {
      value = rain_rate(e, t);
    } else {
      value = base_signal(e.ctx, t) + noise;
    }
    value = clamp_signal(e.res->sensor, value);

    // Injections avoid spans the IQR screen is blind to by design: the
    // warm-up day, outdoor temperature (whose full diurnal swing widens the
    // fences past zero) and prefab rooms.
    bool injectable_signal =
        cfg.outlier_sensors.count(e.res->sensor) &&
        (e.res->sensor != "temperature" ||
         (e.ctx.room && e.ctx.room->profile == RoomProfile::Normal));
    bool inject = cfg.outlier_rate > 0.0 && inject_draw < cfg.outlier_rate &&
                  injectable_signal && t - cfg.start >= model::kMillisPerDay;
    if (inject) {
      double original = value;
      value = inject_value(e.res->sensor, original);
      gt.outliers[e.res->resource_id].push_back({t, original, value});
    }

    ingest::BusMessage msg;
    msg.topic = e.res->device + "/" + e.res->sensor;
    msg.payload = format_value(value) + "@" + std::to_string(t);
    emit(msg);
    ++gt.emitted;
    ++gt.expected_counts[e.res->resource_id];
  }

  for (const auto& [id, days] : loss) gt.loss_days[id] = days;
  return gt;
}

FleetConfig make_fleet_config(int n_sites, int target_sensors, std::uint64_t seed) {
  FleetConfig cfg;
  cfg.seed = seed;
  cfg.start = model::parse_time("2017-09-04T00:00:00Z").value();
  cfg.duration_ms = model::kMillisPerDay;

  const char* zones[3] = {"UTC+02:00", "UTC+01:00", "UTC+01:00"};
  const double climates[3] = {22.0, 17.0, 12.0};
  const char* orientations[8] = {"S", "SW", "SE", "E", "W", "N", "NE", "NW"};

  // fixed per-site overhead: weather (3) + atmospheric (1) + power (3)
  const int overhead = 7;
  int remaining = target_sensors;
  for (int i = 0; i < n_sites; ++i) {
    SiteSpec site;
    char sid[16];
    std::snprintf(sid, sizeof(sid), "site-%02d", i + 1);
    site.site_id = sid;
    site.timezone = zones[i % 3];
    site.outdoor_base_c = climates[i % 3];
    site.power_meters = 3;
    int sites_left = n_sites - i;
    int budget = remaining / sites_left;
    int rooms = std::max(1, (budget - overhead) / 4);
    if (i == n_sites - 1) rooms = std::max(1, (remaining - overhead) / 4);
    for (int r = 0; r < rooms; ++r) {
      RoomSpec room;
      char rid[16];
      std::snprintf(rid, sizeof(rid), "R%d", r + 1);
      room.room_id = rid;
      room.orientation = orientations[r % 8];
      site.rooms.push_back(room);
    }
    remaining -= int(site.rooms.size()) * 4 + overhead;
    cfg.sites.push_back(std::move(site));
  }
  // top up the first sites room by room until the sensor total is exact
  auto count = [&] {
    int n = 0;
    for (const auto& s : cfg.sites) n += int(s.rooms.size()) * 4 + overhead;
    return n;
  };
  int i = 0;
  while (count() + 4 <= target_sensors) {
    auto& site = cfg.sites[std::size_t(i % n_sites)];
    RoomSpec room;
    char rid[16];
    std::snprintf(rid, sizeof(rid), "R%d", int(site.rooms.size()) + 1);
    room.room_id = rid;
    room.orientation = orientations[site.rooms.size() % 8];
    site.rooms.push_back(room);
    ++i;
  }
  return cfg;
}

Result<FleetConfig> parse_fleet_config(const std::string& json_text) {
  auto root = nlohmann::json::parse(json_text, nullptr, false);
  if (root.is_discarded()) return Error{Errc::invalid_config, "fleet config is not valid JSON"};
  FleetConfig cfg;
  if (root.contains("preset")) {
    const auto& p = root["preset"];
    cfg = make_fleet_config(p.value("sites", 18), p.value("sensors", 850), root.value("seed", 1));
  }
  if (root.contains("start")) {
    auto t = model::parse_time(root["start"].get<std::string>());
    if (!t) return Error{Errc::invalid_config, "bad start time"};
    cfg.start = *t;
  } else if (cfg.start == 0) {
    return Error{Errc::invalid_config, "fleet config needs a start time"};
  }
  if (root.contains("duration_hours"))
    cfg.duration_ms = Millis(root["duration_hours"].get<double>() * 3600.0 * 1000.0);
  cfg.seed = root.value("seed", cfg.seed);
  cfg.noise_scale = root.value("noise_scale", 1.0);
  cfg.outlier_rate = root.value("outlier_rate", 0.0);
  if (root.contains("sites")) {
    cfg.sites.clear();
    for (const auto& js : root["sites"]) {
      SiteSpec site;
      site.site_id = js.value("site_id", "");
      if (site.site_id.empty()) return Error{Errc::invalid_config, "site without site_id"};
      site.timezone = js.value("timezone", "UTC+02:00");
      site.outdoor_base_c = js.value("outdoor_base_c", 17.0);
      site.weather_station = js.value("weather_station", true);
      site.atmospheric_station = js.value("atmospheric_station", true);
      site.power_meters = js.value("power_meters", 1);
      site.reporting_period_s = js.value("reporting_period_s", 30);
      if (js.contains("rooms") && js["rooms"].is_number_integer()) {
        const char* orientations[8] = {"S", "SW", "SE", "E", "W", "N", "NE", "NW"};
        for (int r = 0; r < js["rooms"].get<int>(); ++r) {
          RoomSpec room;
          room.room_id = "R" + std::to_string(r + 1);
          room.orientation = orientations[r % 8];
          site.rooms.push_back(room);
        }
      } else if (js.contains("rooms")) {
        for (const auto& jr : js["rooms"]) {
          RoomSpec room;
          room.room_id = jr.value("room_id", "");
          room.orientation = jr.value("orientation", "S");
          if (jr.value("profile", "normal") == "prefab_ramp")
            room.profile = RoomProfile::PrefabRamp;
          if (jr.contains("sensors")) {
            room.sensors.clear();
            for (const auto& s : jr["sensors"]) room.sensors.push_back(s.get<std::string>());
          }
          if (jr.contains("window_events")) {
            for (const auto& je : jr["window_events"]) {
              WindowEvent ev;
              auto at = model::parse_time(je.value("at", ""));
              if (!at) return Error{Errc::invalid_config, "bad window event time"};
              ev.at = *at;
              ev.delta_c = je.value("delta_c", -2.5);
              ev.span_ms = Millis(je.value("span_minutes", 10)) * model::kMillisPerMinute;
              room.window_events.push_back(ev);
            }
          }
          if (room.room_id.empty())
            return Error{Errc::invalid_config, "room without room_id"};
          site.rooms.push_back(room);
        }
      }
      cfg.sites.push_back(std::move(site));
    }
  }
  if (root.contains("loss")) {
    for (const auto& jl : root["loss"]) {
      LossRule rule;
      rule.resource_id = jl.value("resource", "");
      if (rule.resource_id.empty())
        return Error{Errc::invalid_config, "loss rule without resource"};
      if (jl.contains("days"))
        for (const auto& jd : jl["days"]) {
          auto d = model::parse_date(jd.get<std::string>());
          if (!d) return Error{Errc::invalid_config, "bad loss day"};
          rule.days.insert(*d);
        }
      if (jl.contains("day_indices"))
        for (const auto& ji : jl["day_indices"])
          rule.days.insert(
              model::civil_add_days(model::civil_from_ms(cfg.start), ji.get<int>()));
      cfg.loss.push_back(std::move(rule));
    }
  }
  if (cfg.sites.empty()) return Error{Errc::invalid_config, "fleet config has no sites"};
  return cfg;
}

Result<FleetConfig> load_fleet_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) return Error{Errc::io_failure, "cannot open fleet config: " + path};
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_fleet_config(text);
}

std::string ground_truth_json(const GroundTruth& gt) {
  nlohmann::json root;
  root["emitted"] = gt.emitted;
  auto& loss = root["loss_days"] = nlohmann::json::object();
  for (const auto& [id, days] : gt.loss_days) {
    auto arr = nlohmann::json::array();
    for (const auto& d : days) arr.push_back(model::format_date(d));
    loss[id] = arr;
  }
  auto& outliers = root["outliers"] = nlohmann::json::object();
  for (const auto& [id, list] : gt.outliers) {
    auto arr = nlohmann::json::array();
    for (const auto& o : list)
      arr.push_back({{"ts", o.ts}, {"original", o.original}, {"injected", o.injected}});
    outliers[id] = arr;
  }
  auto& counts = root["expected_counts"] = nlohmann::json::object();
  for (const auto& [id, n] : gt.expected_counts) counts[id] = n;
  return root.dump(2);
}

}  // namespace schoolsense::fleetsim
