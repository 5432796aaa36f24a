#include "store/summary_store.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace schoolsense::store {

namespace fs = std::filesystem;
using model::Granularity;
using model::IntervalKey;
using model::IntervalSummary;
using model::Millis;
using model::ResourceId;
using model::Summary;

namespace {

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_opt(std::string_view f) {
  if (f == "_") return std::nullopt;
  double v = 0;
  auto res = std::from_chars(f.data(), f.data() + f.size(), v);
  if (res.ec != std::errc()) return std::nullopt;
  return v;
}

}  // namespace

SummaryStore::SummaryStore(fs::path dir) : root_(std::move(dir)) {
  fs::create_directories(root_ / "summaries");
}

SummaryStore::~SummaryStore() { flush(); }

std::string SummaryStore::encode_record(const IntervalKey& key, const Summary& s) {
  std::string line = std::to_string(key.start);
  line += '\t';
  line += fmt(s.avg);
  line += '\t';
  line += fmt(s.min);
  line += '\t';
  line += fmt(s.max);
  line += '\t';
  line += std::to_string(s.count);
  line += '\t';
  line += s.sum ? fmt(*s.sum) : "_";
  line += '\t';
  line += s.energy_wh ? fmt(*s.energy_wh) : "_";
  return line;
}

void SummaryStore::put(const IntervalSummary& s) {
  std::lock_guard lock(mu_);
  hot_[s.resource_id].hot[std::size_t(s.interval.granularity)][s.interval.start] = s.value;
}

void SummaryStore::append_record(const ResourceId& resource, Granularity g, Millis start,
                                 const Summary& s) {
  fs::path dir = root_ / "summaries" / resource;
  fs::create_directories(dir);
  std::ofstream out(dir / (std::string(model::to_string(g)) + ".log"), std::ios::app);
  out << encode_record({g, start}, s) << '\n';
  ++file_version_[{resource, int(g)}];
}

void SummaryStore::finalize(const ResourceId& resource, const IntervalKey& key) {
  std::lock_guard lock(mu_);
  auto it = hot_.find(resource);
  if (it == hot_.end()) return;
  auto& m = it->second.hot[std::size_t(key.granularity)];
  auto e = m.find(key.start);
  if (e == m.end()) return;
  append_record(resource, key.granularity, key.start, e->second);
  m.erase(e);
}

SummaryStore::KeyMap SummaryStore::load_file(const ResourceId& resource, Granularity g) const {
  auto ck = std::make_pair(resource, int(g));
  std::uint64_t version = 0;
  if (auto it = file_version_.find(ck); it != file_version_.end()) version = it->second;
  if (auto it = cache_.find(ck); it != cache_.end() && it->second.first == version)
    return it->second.second;

  KeyMap m;
  fs::path file = root_ / "summaries" / resource / (std::string(model::to_string(g)) + ".log");
  std::ifstream in(file);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string_view sv(line);
    std::array<std::string_view, 7> fields;
    std::size_t n = 0, pos = 0;
    while (n < 7) {
      std::size_t tab = sv.find('\t', pos);
      fields[n++] = sv.substr(pos, tab == std::string_view::npos ? tab : tab - pos);
      if (tab == std::string_view::npos) break;
      pos = tab + 1;
    }
    if (n != 7) continue;
    Millis start = 0;
    std::int64_t count = 0;
    std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), start);
    std::from_chars(fields[4].data(), fields[4].data() + fields[4].size(), count);
    Summary s;
    s.avg = parse_opt(fields[1]).value_or(0);
    s.min = parse_opt(fields[2]).value_or(0);
    s.max = parse_opt(fields[3]).value_or(0);
    s.count = count;
    s.sum = parse_opt(fields[5]);
    s.energy_wh = parse_opt(fields[6]);
    m[start] = s;  // later records win
  }
  cache_[ck] = {version, m};
  // keep the read cache small; it only serves query bursts
  while (cache_.size() > 64) cache_.erase(cache_.begin());
  return m;
}

std::optional<IntervalSummary> SummaryStore::get(const ResourceId& resource,
                                                 const IntervalKey& key) const {
  std::lock_guard lock(mu_);
  if (auto it = hot_.find(resource); it != hot_.end()) {
    const auto& m = it->second.hot[std::size_t(key.granularity)];
    if (auto e = m.find(key.start); e != m.end())
      return IntervalSummary{resource, key, e->second};
  }
  KeyMap disk = load_file(resource, key.granularity);
  if (auto e = disk.find(key.start); e != disk.end())
    return IntervalSummary{resource, key, e->second};
  return std::nullopt;
}

std::vector<IntervalSummary> SummaryStore::get_range(const ResourceId& resource, Granularity g,
                                                     Millis t0, Millis t1) const {
  std::lock_guard lock(mu_);
  KeyMap merged = load_file(resource, g);
  if (auto it = hot_.find(resource); it != hot_.end())
    for (const auto& [start, s] : it->second.hot[std::size_t(g)]) merged[start] = s;
  std::vector<IntervalSummary> out;
  for (auto it = merged.lower_bound(t0); it != merged.end() && it->first < t1; ++it)
    out.push_back({resource, {g, it->first}, it->second});
  return out;
}

void SummaryStore::flush() {
  std::lock_guard lock(mu_);
  for (auto& [resource, pr] : hot_) {
    for (std::size_t gi = 0; gi < pr.hot.size(); ++gi) {
      for (const auto& [start, s] : pr.hot[gi])
        append_record(resource, Granularity(gi), start, s);
      pr.hot[gi].clear();
    }
  }
}

void SummaryStore::compact() {
  flush();
  std::lock_guard lock(mu_);
  fs::path base = root_ / "summaries";
  if (!fs::exists(base)) return;
  for (const auto& rd : fs::directory_iterator(base)) {
    if (!rd.is_directory()) continue;
    ResourceId resource = rd.path().filename().string();
    for (Granularity g : model::kAllGranularities) {
      fs::path file = rd.path() / (std::string(model::to_string(g)) + ".log");
      if (!fs::exists(file)) continue;
      KeyMap m = load_file(resource, g);
      std::ofstream out(file, std::ios::trunc);
      for (const auto& [start, s] : m) out << encode_record({g, start}, s) << '\n';
      ++file_version_[{resource, int(g)}];
    }
  }
}

std::size_t SummaryStore::resident_entries() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [resource, pr] : hot_)
    for (const auto& m : pr.hot) n += m.size();
  return n;
}

std::vector<ResourceId> SummaryStore::resources() const {
  std::lock_guard lock(mu_);
  std::vector<ResourceId> out;
  fs::path base = root_ / "summaries";
  if (fs::exists(base))
    for (const auto& e : fs::directory_iterator(base))
      if (e.is_directory()) out.push_back(e.path().filename().string());
  for (const auto& [resource, pr] : hot_) {
    bool present = false;
    for (const auto& r : out) present = present || r == resource;
    if (!present) out.push_back(resource);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string SummaryStore::export_canonical(const ResourceId& resource) const {
  std::lock_guard lock(mu_);
  std::ostringstream os;
  for (Granularity g : model::kAllGranularities) {
    KeyMap merged = load_file(resource, g);
    if (auto it = hot_.find(resource); it != hot_.end())
      for (const auto& [start, s] : it->second.hot[std::size_t(g)]) merged[start] = s;
    for (const auto& [start, s] : merged)
      os << resource << '\t' << model::to_string(g) << '\t' << encode_record({g, start}, s)
         << '\n';
  }
  return os.str();
}

std::string SummaryStore::export_canonical() const {
  std::string out;
  for (const auto& r : resources()) out += export_canonical(r);
  return out;
}

}  // namespace schoolsense::store
