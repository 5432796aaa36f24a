#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "common/result.hpp"
#include "model/types.hpp"

namespace schoolsense::store {

// Append-only persistence of readings in their arrival form, one JSON line
// per reading, segmented per resource per UTC day:
//   <dir>/raw/<resource>/<yyyy-mm-dd>.log
// Readings for unregistered resources land in a quarantine segment instead.
class RawLog {
 public:
  explicit RawLog(std::filesystem::path dir);
  ~RawLog();

  Status append(const model::Reading& r);
  Status quarantine(const model::Reading& r);

  // All stored readings with t0 <= timestamp < t1, timestamp-ordered.
  Result<std::vector<model::Reading>> get_raw(const model::ResourceId& resource,
                                              model::Millis t0, model::Millis t1) const;

  std::vector<model::ResourceId> resources() const;
  std::uint64_t appended() const;
  std::uint64_t quarantined() const;

  void flush();

  static std::string format_line(const model::Reading& r);
  static std::optional<model::Reading> parse_line(const std::string& line,
                                                  const model::ResourceId& resource);

 private:
  struct Segment {
    std::string day;
    std::ofstream out;
  };

  Status write_line(const model::ResourceId& resource, const model::Reading& r);

  std::filesystem::path root_;
  mutable std::mutex mu_;
  std::map<model::ResourceId, Segment> open_;  // one open segment per resource
  std::uint64_t appended_ = 0;
  std::uint64_t quarantined_ = 0;
};

}  // namespace schoolsense::store
