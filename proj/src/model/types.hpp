#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "model/time.hpp"

namespace schoolsense::model {

using ResourceId = std::string;

// One timestamped measurement from one sensor of one device.
struct Reading {
  ResourceId resource_id;
  std::string device;
  std::string sensor;
  double value = 0.0;
  Millis timestamp = 0;
};

enum class ResourceKind { Environmental, Atmospheric, Weather, Power };

const char* to_string(ResourceKind k);
std::optional<ResourceKind> resource_kind_from_string(std::string_view s);

enum class AggregationType { Average, Total, Power };

const char* to_string(AggregationType t);
std::optional<AggregationType> aggregation_type_from_string(std::string_view s);

// Fold applied per sensor kind. Sensor-name specials first (precipitation
// accumulates, current meters become power), kind is the fallback.
AggregationType aggregation_for(ResourceKind kind, const std::string& sensor);

struct ResourceDescriptor {
  ResourceId resource_id;
  std::string device;
  std::string sensor;
  ResourceKind kind = ResourceKind::Environmental;
  std::string units;
  std::int32_t reporting_period_s = 30;
  std::string site_id;
  std::optional<std::string> room_id;
};

// Aggregate for one resource x one granularity x one aligned interval.
// `sum` is populated for TOTAL resources, `energy_wh` for POWER resources.
struct Summary {
  double avg = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::int64_t count = 0;
  std::optional<double> sum;
  std::optional<double> energy_wh;

  bool operator==(const Summary&) const = default;
};

struct IntervalSummary {
  ResourceId resource_id;
  IntervalKey interval;
  Summary value;

  bool operator==(const IntervalSummary&) const = default;
};

struct Room {
  std::string room_id;
  std::string orientation;  // N, NE, E, SE, S, SW, W, NW
};

struct SchoolHours {
  int start_minutes = 8 * 60 + 30;  // 08:30 local
  int end_minutes = 16 * 60 + 30;   // 16:30 local
};

struct SiteTopology {
  std::string site_id;
  std::string name;
  std::string timezone = "UTC";
  CivilDate incorporated;
  SchoolHours school_hours;
  std::vector<Room> rooms;
  std::vector<ResourceDescriptor> resources;
};

struct Topology {
  std::vector<SiteTopology> sites;

  const SiteTopology* find_site(const std::string& site_id) const;
  std::size_t resource_count() const;
};

}  // namespace schoolsense::model
