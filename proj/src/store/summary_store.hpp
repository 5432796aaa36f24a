#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "common/result.hpp"
#include "model/types.hpp"

namespace schoolsense::store {

// Keyed map (resource, granularity, interval start) -> IntervalSummary,
// last write wins. Backed by one append-only record file per resource and
// granularity under <dir>/summaries/<resource>/<granularity>.log.
//
// Open (recently updated) intervals live in a hot in-memory overlay; when
// the engine retires an interval it is spilled to disk and dropped from the
// overlay, so resident memory follows the engine's retention contract
// rather than the store's total size. compact() rewrites each file sorted
// and de-duplicated.
class SummaryStore {
 public:
  explicit SummaryStore(std::filesystem::path dir);
  ~SummaryStore();

  void put(const model::IntervalSummary& s);
  std::optional<model::IntervalSummary> get(const model::ResourceId& resource,
                                            const model::IntervalKey& key) const;

  // Summaries with t0 <= interval start < t1, ordered by interval start.
  std::vector<model::IntervalSummary> get_range(const model::ResourceId& resource,
                                                model::Granularity g, model::Millis t0,
                                                model::Millis t1) const;

  // Spill one interval from the hot overlay to disk (engine eviction hook).
  void finalize(const model::ResourceId& resource, const model::IntervalKey& key);

  void flush();    // spill everything hot
  void compact();  // flush + rewrite files sorted/unique

  std::size_t resident_entries() const;  // hot overlay size, all resources
  std::vector<model::ResourceId> resources() const;

  // Canonical dump (sorted, full precision) for determinism comparisons.
  std::string export_canonical(const model::ResourceId& resource) const;
  std::string export_canonical() const;

  static std::string encode_record(const model::IntervalKey& key, const model::Summary& s);

 private:
  using KeyMap = std::map<model::Millis, model::Summary>;
  struct PerResource {
    std::array<KeyMap, 5> hot;
  };

  KeyMap load_file(const model::ResourceId& resource, model::Granularity g) const;
  void append_record(const model::ResourceId& resource, model::Granularity g, model::Millis start,
                     const model::Summary& s);

  std::filesystem::path root_;
  mutable std::mutex mu_;
  std::map<model::ResourceId, PerResource> hot_;
  // read cache: (resource, granularity) -> {file version, merged map}
  mutable std::map<std::pair<model::ResourceId, int>, std::pair<std::uint64_t, KeyMap>> cache_;
  mutable std::map<std::pair<model::ResourceId, int>, std::uint64_t> file_version_;
};

}  // namespace schoolsense::store
