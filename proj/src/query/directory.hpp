#pragma once

#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "common/result.hpp"
#include "model/types.hpp"

namespace schoolsense::query {

// Registry of sensing endpoints. Lookups are O(1) amortized on both the
// resource id and the (device, sensor) pair; safe for concurrent use.
class Directory {
 public:
  Directory() = default;

  Result<model::ResourceId> register_resource(const model::ResourceDescriptor& d);
  Status register_topology(const model::Topology& topo);

  std::optional<model::ResourceDescriptor> find(const model::ResourceId& id) const;
  std::optional<model::ResourceDescriptor> resolve(const std::string& device,
                                                   const std::string& sensor) const;
  std::vector<model::ResourceDescriptor> list_resources() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<model::ResourceId, model::ResourceDescriptor> by_id_;
  std::unordered_map<std::string, model::ResourceId> by_pair_;  // "device/sensor"
};

}  // namespace schoolsense::query
