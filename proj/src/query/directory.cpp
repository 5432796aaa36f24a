#include "query/directory.hpp"

#include <algorithm>

namespace schoolsense::query {

using model::ResourceDescriptor;
using model::ResourceId;

Result<ResourceId> Directory::register_resource(const ResourceDescriptor& d) {
  if (d.device.empty() || d.sensor.empty())
    return Error{Errc::invalid_argument, "resource needs non-empty device and sensor"};
  if (d.reporting_period_s <= 0)
    return Error{Errc::invalid_argument, "reporting_period must be > 0"};
  std::lock_guard lock(mu_);
  std::string pair = d.device + "/" + d.sensor;
  if (by_pair_.count(pair))
    return Error{Errc::duplicate_resource, "already registered: " + pair};
  ResourceDescriptor stored = d;
  if (stored.resource_id.empty()) stored.resource_id = d.device + "." + d.sensor;
  if (stored.resource_id.find_first_of("/\\:") != std::string::npos)
    return Error{Errc::invalid_argument, "resource_id must not contain path separators"};
  if (by_id_.count(stored.resource_id))
    return Error{Errc::duplicate_resource, "resource id in use: " + stored.resource_id};
  by_pair_.emplace(std::move(pair), stored.resource_id);
  ResourceId id = stored.resource_id;
  by_id_.emplace(id, std::move(stored));
  return id;
}

Status Directory::register_topology(const model::Topology& topo) {
  for (const auto& site : topo.sites)
    for (const auto& res : site.resources) {
      auto r = register_resource(res);
      if (!r.ok()) return r.error();
    }
  return Status::success();
}

std::optional<ResourceDescriptor> Directory::find(const ResourceId& id) const {
  std::lock_guard lock(mu_);
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<ResourceDescriptor> Directory::resolve(const std::string& device,
                                                     const std::string& sensor) const {
  std::lock_guard lock(mu_);
  auto it = by_pair_.find(device + "/" + sensor);
  if (it == by_pair_.end()) return std::nullopt;
  return by_id_.at(it->second);
}

std::vector<ResourceDescriptor> Directory::list_resources() const {
  std::lock_guard lock(mu_);
  std::vector<ResourceDescriptor> out;
  out.reserve(by_id_.size());
  for (const auto& [id, d] : by_id_) out.push_back(d);
  std::sort(out.begin(), out.end(),
            [](const ResourceDescriptor& a, const ResourceDescriptor& b) {
              return a.resource_id < b.resource_id;
            });
  return out;
}

std::size_t Directory::size() const {
  std::lock_guard lock(mu_);
  return by_id_.size();
}

}  // namespace schoolsense::query
