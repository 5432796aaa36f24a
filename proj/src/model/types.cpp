#include "model/types.hpp"

namespace schoolsense::model {

const char* to_string(ResourceKind k) {
  switch (k) {
    case ResourceKind::Environmental: return "environmental";
    case ResourceKind::Atmospheric: return "atmospheric";
    case ResourceKind::Weather: return "weather";
    case ResourceKind::Power: return "power";
  }
  return "?";
}

std::optional<ResourceKind> resource_kind_from_string(std::string_view s) {
  if (s == "environmental") return ResourceKind::Environmental;
  if (s == "atmospheric") return ResourceKind::Atmospheric;
  if (s == "weather") return ResourceKind::Weather;
  if (s == "power") return ResourceKind::Power;
  return std::nullopt;
}

const char* to_string(AggregationType t) {
  switch (t) {
    case AggregationType::Average: return "average";
    case AggregationType::Total: return "total";
    case AggregationType::Power: return "power";
  }
  return "?";
}

std::optional<AggregationType> aggregation_type_from_string(std::string_view s) {
  if (s == "average") return AggregationType::Average;
  if (s == "total") return AggregationType::Total;
  if (s == "power") return AggregationType::Power;
  return std::nullopt;
}

AggregationType aggregation_for(ResourceKind kind, const std::string& sensor) {
  if (sensor == "precipitation" || sensor == "rain") return AggregationType::Total;
  if (sensor == "current" || sensor == "power") return AggregationType::Power;
  if (kind == ResourceKind::Power) return AggregationType::Power;
  return AggregationType::Average;
}

const SiteTopology* Topology::find_site(const std::string& site_id) const {
  for (const auto& s : sites)
    if (s.site_id == site_id) return &s;
  return nullptr;
}

std::size_t Topology::resource_count() const {
  std::size_t n = 0;
  for (const auto& s : sites) n += s.resources.size();
  return n;
}

}  // namespace schoolsense::model
