#include "store/raw_log.hpp"

#include <algorithm>
#include <charconv>

#include <json.hpp>

namespace schoolsense::store {

namespace fs = std::filesystem;
using model::Millis;
using model::Reading;
using model::ResourceId;

namespace {

constexpr const char* kQuarantine = "_quarantine";

std::string sanitize(const ResourceId& id) {
  std::string out = id;
  for (char& c : out)
    if (c == '/' || c == '\\' || c == ':') c = '_';
  return out;
}

std::string day_of(Millis ts) { return model::format_date(model::civil_from_ms(ts)); }

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

RawLog::RawLog(fs::path dir) : root_(std::move(dir)) {
  fs::create_directories(root_ / "raw");
}

RawLog::~RawLog() { flush(); }

std::string RawLog::format_line(const Reading& r) {
  std::string line = "{\"device\":\"";
  line += r.device;
  line += "\",\"sensor\":\"";
  line += r.sensor;
  line += "\",\"value\":";
  line += format_double(r.value);
  line += ",\"ts\":";
  line += std::to_string(r.timestamp);
  line += "}";
  return line;
}

std::optional<Reading> RawLog::parse_line(const std::string& line, const ResourceId& resource) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.contains("value") || !j.contains("ts")) return std::nullopt;
  Reading r;
  r.resource_id = resource;
  r.device = j.value("device", "");
  r.sensor = j.value("sensor", "");
  if (!j["value"].is_number() || !j["ts"].is_number_integer()) return std::nullopt;
  r.value = j["value"].get<double>();
  r.timestamp = j["ts"].get<std::int64_t>();
  return r;
}

Status RawLog::write_line(const ResourceId& resource, const Reading& r) {
  std::lock_guard lock(mu_);
  std::string day = day_of(r.timestamp);
  auto it = open_.find(resource);
  if (it == open_.end() || it->second.day != day) {
    if (it != open_.end()) it->second.out.flush();  // segment roll
    fs::path dir = root_ / "raw" / sanitize(resource);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) return Error{Errc::io_failure, "mkdir failed: " + dir.string()};
    Segment seg;
    seg.day = day;
    seg.out.open(dir / (day + ".log"), std::ios::app);
    if (!seg.out) return Error{Errc::io_failure, "cannot open raw segment for " + resource};
    it = open_.insert_or_assign(it == open_.end() ? open_.begin() : it, resource,
                                std::move(seg));
  }
  it->second.out << format_line(r) << '\n';
  if (!it->second.out) return Error{Errc::io_failure, "raw append failed for " + resource};
  return Status::success();
}

Status RawLog::append(const Reading& r) {
  auto st = write_line(r.resource_id, r);
  if (st.ok()) {
    std::lock_guard lock(mu_);
    ++appended_;
  }
  return st;
}

Status RawLog::quarantine(const Reading& r) {
  auto st = write_line(kQuarantine, r);
  if (st.ok()) {
    std::lock_guard lock(mu_);
    ++quarantined_;
  }
  return st;
}

Result<std::vector<Reading>> RawLog::get_raw(const ResourceId& resource, Millis t0,
                                             Millis t1) const {
  if (t0 >= t1) return Error{Errc::invalid_argument, "empty range"};
  {
    // Readers see only flushed data; flush open segment for this resource.
    std::lock_guard lock(mu_);
    auto it = open_.find(resource);
    if (it != open_.end()) const_cast<std::ofstream&>(it->second.out).flush();
  }
  fs::path dir = root_ / "raw" / sanitize(resource);
  if (!fs::exists(dir)) {
    if (resource != kQuarantine)
      return Error{Errc::unknown_resource, "no raw data for " + resource};
    return std::vector<Reading>{};
  }
  std::vector<Reading> out;
  model::CivilDate d0 = model::civil_from_ms(t0);
  model::CivilDate d1 = model::civil_from_ms(t1 - 1);
  for (model::CivilDate d = d0;; d = model::civil_add_days(d, 1)) {
    fs::path file = dir / (model::format_date(d) + ".log");
    if (fs::exists(file)) {
      std::ifstream in(file);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto r = parse_line(line, resource);
        if (r && r->timestamp >= t0 && r->timestamp < t1) out.push_back(std::move(*r));
      }
    }
    if (d == d1) break;
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Reading& a, const Reading& b) { return a.timestamp < b.timestamp; });
  return out;
}

std::vector<ResourceId> RawLog::resources() const {
  std::vector<ResourceId> out;
  fs::path dir = root_ / "raw";
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory() && e.path().filename() != kQuarantine)
      out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t RawLog::appended() const {
  std::lock_guard lock(mu_);
  return appended_;
}

std::uint64_t RawLog::quarantined() const {
  std::lock_guard lock(mu_);
  return quarantined_;
}

void RawLog::flush() {
  std::lock_guard lock(mu_);
  for (auto& [id, seg] : open_) seg.out.flush();
}

}  // namespace schoolsense::store
