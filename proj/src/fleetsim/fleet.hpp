#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "common/result.hpp"
#include "ingest/bus.hpp"
#include "model/topology.hpp"

namespace schoolsense::fleetsim {

enum class RoomProfile { Normal, PrefabRamp };

struct WindowEvent {
  model::Millis at = 0;
  double delta_c = -2.5;
  model::Millis span_ms = 10 * model::kMillisPerMinute;
};

struct RoomSpec {
  std::string room_id;
  std::string orientation = "S";
  RoomProfile profile = RoomProfile::Normal;
  std::vector<std::string> sensors = {"temperature", "humidity", "luminosity", "noise"};
  std::vector<WindowEvent> window_events;
};

struct SiteSpec {
  std::string site_id;
  std::string timezone = "UTC+02:00";
  double outdoor_base_c = 17.0;  // climate knob; lower for northern sites
  std::vector<RoomSpec> rooms;
  bool weather_station = true;   // outdoor temperature, wind_speed, precipitation
  bool atmospheric_station = true;  // pressure
  int power_meters = 1;          // one current feed per phase meter
  std::int32_t reporting_period_s = 30;
};

struct LossRule {
  model::ResourceId resource_id;
  std::set<model::CivilDate> days;  // site-local dates with zero emissions
};

struct FleetConfig {
  model::Millis start = 0;
  model::Millis duration_ms = model::kMillisPerDay;
  std::uint64_t seed = 1;
  double noise_scale = 1.0;  // 0 disables measurement noise
  double outlier_rate = 0.0;
  std::set<std::string> outlier_sensors = {"temperature", "humidity", "current"};
  std::vector<SiteSpec> sites;
  std::vector<LossRule> loss;
};

Result<FleetConfig> load_fleet_config(const std::string& path);
Result<FleetConfig> parse_fleet_config(const std::string& json_text);

// A fleet shaped like the deployment the defaults describe: n_sites sites
// sized so the sensor total lands exactly on target_sensors.
FleetConfig make_fleet_config(int n_sites, int target_sensors, std::uint64_t seed);

struct InjectedOutlier {
  model::Millis ts = 0;
  double original = 0.0;
  double injected = 0.0;
};

struct GroundTruth {
  std::map<model::ResourceId, std::set<model::CivilDate>> loss_days;
  std::map<model::ResourceId, std::vector<InjectedOutlier>> outliers;
  std::map<model::ResourceId, std::uint64_t> expected_counts;  // after scheduled loss
  std::uint64_t emitted = 0;
};

using EmitFn = std::function<void(const ingest::BusMessage&)>;

// Deterministic for a given config: same seed, byte-identical stream.
// Messages are emitted in timestamp order across the whole fleet.
Result<GroundTruth> generate(const FleetConfig& cfg, const model::Topology& topo,
                             const EmitFn& emit);

// Topology implied by the config (resource ids, rooms, placement).
Result<model::Topology> fleet_topology(const FleetConfig& cfg);

std::string ground_truth_json(const GroundTruth& gt);

}  // namespace schoolsense::fleetsim
