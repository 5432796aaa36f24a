#include "model/topology.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace schoolsense::model {

using nlohmann::json;

namespace {

int parse_minutes(const std::string& hhmm, int fallback) {
  if (hhmm.size() != 5 || hhmm[2] != ':') return fallback;
  return std::atoi(hhmm.substr(0, 2).c_str()) * 60 + std::atoi(hhmm.substr(3, 2).c_str());
}

std::string minutes_to_string(int m) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", m / 60, m % 60);
  return buf;
}

Result<ResourceDescriptor> parse_resource(const json& j, const std::string& site_id) {
  ResourceDescriptor d;
  if (!j.contains("device") || !j.contains("sensor"))
    return Error{Errc::invalid_config, "resource needs device and sensor"};
  d.device = j.at("device").get<std::string>();
  d.sensor = j.at("sensor").get<std::string>();
  d.resource_id = j.value("resource_id", d.device + "." + d.sensor);
  if (d.resource_id.find_first_of("/\\:") != std::string::npos)
    return Error{Errc::invalid_config, "resource_id must not contain path separators"};
  auto kind = resource_kind_from_string(j.value("kind", "environmental"));
  if (!kind)
    return Error{Errc::invalid_config, "unknown resource kind for " + d.resource_id};
  d.kind = *kind;
  d.units = j.value("units", "");
  d.reporting_period_s = j.value("reporting_period_s", 30);
  if (d.reporting_period_s <= 0)
    return Error{Errc::invalid_config, "reporting_period_s must be > 0 for " + d.resource_id};
  d.site_id = site_id;
  if (j.contains("room_id")) d.room_id = j.at("room_id").get<std::string>();
  return d;
}

}  // namespace

Result<Topology> parse_topology_json(const std::string& json_text) {
  json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded())
    return Error{Errc::invalid_config, "topology file is not valid JSON"};
  if (!root.contains("sites") || !root["sites"].is_array())
    return Error{Errc::invalid_config, "topology needs a sites array"};

  Topology topo;
  std::set<std::string> seen_pairs;
  for (const auto& js : root["sites"]) {
    SiteTopology site;
    site.site_id = js.value("site_id", "");
    if (site.site_id.empty())
      return Error{Errc::invalid_config, "site without site_id"};
    site.name = js.value("name", site.site_id);
    site.timezone = js.value("timezone", "UTC");
    auto inc = parse_date(js.value("incorporated", "1970-01-01"));
    if (!inc)
      return Error{Errc::invalid_config, "bad incorporated date for site " + site.site_id};
    site.incorporated = *inc;
    if (js.contains("school_hours")) {
      site.school_hours.start_minutes =
          parse_minutes(js["school_hours"].value("start", "08:30"), 8 * 60 + 30);
      site.school_hours.end_minutes =
          parse_minutes(js["school_hours"].value("end", "16:30"), 16 * 60 + 30);
    }
    if (js.contains("rooms")) {
      for (const auto& jr : js["rooms"]) {
        Room r;
        r.room_id = jr.value("room_id", "");
        r.orientation = jr.value("orientation", "N");
        if (r.room_id.empty())
          return Error{Errc::invalid_config, "room without room_id in site " + site.site_id};
        site.rooms.push_back(r);
        if (jr.contains("resources")) {
          for (const auto& jres : jr["resources"]) {
            auto d = parse_resource(jres, site.site_id);
            if (!d.ok()) return d.error();
            d.value().room_id = r.room_id;
            site.resources.push_back(d.take());
          }
        }
      }
    }
    if (js.contains("resources")) {  // site-level resources (rooftop, breaker box)
      for (const auto& jres : js["resources"]) {
        auto d = parse_resource(jres, site.site_id);
        if (!d.ok()) return d.error();
        site.resources.push_back(d.take());
      }
    }
    for (const auto& r : site.resources) {
      std::string pair = r.device + "/" + r.sensor;
      if (!seen_pairs.insert(pair).second)
        return Error{Errc::invalid_config, "duplicate device/sensor pair: " + pair};
    }
    topo.sites.push_back(std::move(site));
  }
  return topo;
}

Result<Topology> load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) return Error{Errc::io_failure, "cannot open topology file: " + path};
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_topology_json(text);
}

std::string topology_to_json(const Topology& t) {
  json root;
  root["sites"] = json::array();
  for (const auto& s : t.sites) {
    json js;
    js["site_id"] = s.site_id;
    js["name"] = s.name;
    js["timezone"] = s.timezone;
    js["incorporated"] = format_date(s.incorporated);
    js["school_hours"] = {{"start", minutes_to_string(s.school_hours.start_minutes)},
                          {"end", minutes_to_string(s.school_hours.end_minutes)}};
    js["rooms"] = json::array();
    for (const auto& r : s.rooms) {
      json jr;
      jr["room_id"] = r.room_id;
      jr["orientation"] = r.orientation;
      jr["resources"] = json::array();
      for (const auto& res : s.resources) {
        if (res.room_id && *res.room_id == r.room_id) {
          jr["resources"].push_back({{"resource_id", res.resource_id},
                                     {"device", res.device},
                                     {"sensor", res.sensor},
                                     {"kind", to_string(res.kind)},
                                     {"units", res.units},
                                     {"reporting_period_s", res.reporting_period_s}});
        }
      }
      js["rooms"].push_back(jr);
    }
    js["resources"] = json::array();
    for (const auto& res : s.resources) {
      if (!res.room_id) {
        js["resources"].push_back({{"resource_id", res.resource_id},
                                   {"device", res.device},
                                   {"sensor", res.sensor},
                                   {"kind", to_string(res.kind)},
                                   {"units", res.units},
                                   {"reporting_period_s", res.reporting_period_s}});
      }
    }
    root["sites"].push_back(js);
  }
  return root.dump(2);
}

Status save_topology(const Topology& t, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) return Error{Errc::io_failure, "cannot write topology file: " + path};
  out << topology_to_json(t) << "\n";
  if (!out) return Error{Errc::io_failure, "short write to " + path};
  return Status::success();
}

}  // namespace schoolsense::model
