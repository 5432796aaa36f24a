#pragma once

#include <string>

#include "common/result.hpp"
#include "model/types.hpp"

namespace schoolsense::model {

// Topology config file: one JSON document listing sites, rooms and resources.
// Schema is documented in docs/topology.md.
Result<Topology> load_topology(const std::string& path);
Result<Topology> parse_topology_json(const std::string& json_text);
std::string topology_to_json(const Topology& t);
Status save_topology(const Topology& t, const std::string& path);

}  // namespace schoolsense::model
