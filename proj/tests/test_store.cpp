#include <doctest.h>

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "platform.hpp"
#include "store/raw_log.hpp"
#include "store/replay.hpp"
#include "store/summary_store.hpp"

using namespace schoolsense;
using model::Granularity;
using model::Millis;
using model::Reading;

namespace {

const Millis kBase = model::parse_time("2017-09-30T10:00:00Z").value();

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("schoolsense-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

Reading reading(const std::string& id, Millis ts, double value) {
  Reading r;
  r.resource_id = id;
  r.device = id;
  r.sensor = "temperature";
  r.timestamp = ts;
  r.value = value;
  return r;
}

}  // namespace

TEST_CASE("raw log: read your writes") {
  TempDir dir;
  store::RawLog raw(dir.path);
  REQUIRE(raw.append(reading("t", kBase + 1000, 20.5)).ok());
  auto got = raw.get_raw("t", kBase, kBase + 2000);
  REQUIRE(got.ok());
  REQUIRE(got.value().size() == 1);
  CHECK(got.value()[0].value == 20.5);
  CHECK(got.value()[0].timestamp == kBase + 1000);
  CHECK(got.value()[0].device == "t");
}

TEST_CASE("raw log stores duplicates verbatim") {
  TempDir dir;
  store::RawLog raw(dir.path);
  REQUIRE(raw.append(reading("t", kBase, 1.0)).ok());
  REQUIRE(raw.append(reading("t", kBase, 1.0)).ok());
  auto got = raw.get_raw("t", kBase, kBase + 1);
  REQUIRE(got.ok());
  CHECK(got.value().size() == 2);
}

TEST_CASE("raw range is half-open and ordered") {
  TempDir dir;
  store::RawLog raw(dir.path);
  // span two UTC days, written out of order
  std::vector<Millis> stamps = {kBase + 5000,       kBase,
                                kBase + 1000,       kBase + model::kMillisPerDay,
                                kBase - 36'000'000, kBase + 2 * model::kMillisPerDay};
  for (Millis ts : stamps) REQUIRE(raw.append(reading("t", ts, double(ts % 97))).ok());

  auto got = raw.get_raw("t", kBase, kBase + model::kMillisPerDay + 1);
  REQUIRE(got.ok());
  REQUIRE(got.value().size() == 4);
  for (std::size_t i = 1; i < got.value().size(); ++i)
    CHECK(got.value()[i - 1].timestamp <= got.value()[i].timestamp);
  CHECK(got.value().front().timestamp == kBase);                       // t0 included
  CHECK(got.value().back().timestamp == kBase + model::kMillisPerDay);  // t1 excluded

  SUBCASE("empty store range") {
    auto none = raw.get_raw("t", kBase + 10 * model::kMillisPerDay,
                            kBase + 11 * model::kMillisPerDay);
    REQUIRE(none.ok());
    CHECK(none.value().empty());
  }
  SUBCASE("unknown resource") {
    CHECK(raw.get_raw("ghost", kBase, kBase + 1).code() == Errc::unknown_resource);
  }
  SUBCASE("adjacent ranges partition the readings") {
    Millis t0 = kBase - 2 * model::kMillisPerDay, t2 = kBase + 3 * model::kMillisPerDay;
    Millis t1 = kBase + 4321;
    auto left = raw.get_raw("t", t0, t1);
    auto right = raw.get_raw("t", t1, t2);
    auto whole = raw.get_raw("t", t0, t2);
    REQUIRE(left.ok());
    REQUIRE(right.ok());
    REQUIRE(whole.ok());
    CHECK(left.value().size() + right.value().size() == whole.value().size());
  }
}

TEST_CASE("quarantine is separate and counted") {
  TempDir dir;
  store::RawLog raw(dir.path);
  for (int i = 0; i < 5; ++i)
    REQUIRE(raw.quarantine(reading("ghost", kBase + i, 1.0)).ok());
  REQUIRE(raw.append(reading("t", kBase, 1.0)).ok());
  CHECK(raw.quarantined() == 5);
  CHECK(raw.appended() == 1);
  auto resources = raw.resources();
  REQUIRE(resources.size() == 1);  // quarantine segment is not a resource
  CHECK(resources[0] == "t");
}

TEST_CASE("summary store: last write wins, ranges are ordered") {
  TempDir dir;
  store::SummaryStore ss(dir.path);
  model::IntervalSummary s;
  s.resource_id = "t";
  s.interval = {Granularity::FiveMin, kBase};
  s.value.avg = s.value.min = s.value.max = 20.0;
  s.value.count = 1;
  ss.put(s);
  s.value.avg = 21.0;
  s.value.count = 2;
  ss.put(s);
  auto got = ss.get("t", {Granularity::FiveMin, kBase});
  REQUIRE(got.has_value());
  CHECK(got->value.avg == 21.0);
  CHECK(got->value.count == 2);

  for (int i = 1; i < 6; ++i) {
    s.interval.start = kBase + i * model::kFiveMinutes;
    ss.put(s);
  }
  auto range = ss.get_range("t", Granularity::FiveMin, kBase + model::kFiveMinutes,
                            kBase + 4 * model::kFiveMinutes);
  REQUIRE(range.size() == 3);
  CHECK(range.front().interval.start == kBase + model::kFiveMinutes);
}

TEST_CASE("summary store round-trips values through disk exactly") {
  TempDir dir;
  std::mt19937_64 rng(17);
  std::string before;
  {
    store::SummaryStore ss(dir.path);
    for (int i = 0; i < 200; ++i) {
      model::IntervalSummary s;
      s.resource_id = i % 2 ? "a" : "b";
      s.interval = {Granularity(i % 5), kBase + (i / 5) * model::kMillisPerHour};
      s.value.avg = std::ldexp(double(rng() >> 11), -40);
      s.value.min = s.value.avg - 1;
      s.value.max = s.value.avg + 1;
      s.value.count = std::int64_t(rng() % 1000 + 1);
      if (i % 3 == 0) s.value.sum = s.value.avg * double(s.value.count);
      if (i % 3 == 1) s.value.energy_wh = s.value.avg / 12.0;
      ss.put(s);
    }
    before = ss.export_canonical();
    ss.flush();
  }
  {
    store::SummaryStore reopened(dir.path);
    CHECK(reopened.export_canonical() == before);  // byte-exact after disk round-trip
    reopened.compact();
    CHECK(reopened.export_canonical() == before);
  }
}

TEST_CASE("finalize spills hot entries to disk without changing reads") {
  TempDir dir;
  store::SummaryStore ss(dir.path);
  model::IntervalSummary s;
  s.resource_id = "t";
  s.interval = {Granularity::FiveMin, kBase};
  s.value.avg = 20.0;
  s.value.count = 4;
  ss.put(s);
  CHECK(ss.resident_entries() == 1);
  ss.finalize("t", s.interval);
  CHECK(ss.resident_entries() == 0);
  auto got = ss.get("t", s.interval);
  REQUIRE(got.has_value());
  CHECK(got->value.avg == 20.0);
}

TEST_CASE("replay reproduces the original summary store byte for byte") {
  TempDir source_dir;
  std::string original_export;
  {
    PlatformConfig cfg;
    cfg.store_dir = source_dir.path.string();
    cfg.auto_register = true;
    auto platform = Platform::open(cfg);
    REQUIRE(platform.ok());
    std::mt19937_64 rng(23);
    std::vector<Reading> log;
    for (int i = 0; i < 2000; ++i) {
      const char* ids[3] = {"a", "b", "c"};
      log.push_back(
          reading(ids[rng() % 3], kBase + Millis(i) * 20'000 + Millis(rng() % 15'000),
                  double(rng() % 5000) / 41.0));
    }
    std::stable_sort(log.begin(), log.end(), [](const Reading& a, const Reading& b) {
      return a.timestamp < b.timestamp;
    });
    for (const auto& r : log) platform.value()->submit_reading(r);
    platform.value()->flush();
    original_export = platform.value()->summaries().export_canonical();
  }

  // replay the stored raw stream into a fresh platform
  TempDir replay_dir;
  {
    store::RawLog raw(source_dir.path);
    PlatformConfig cfg;
    cfg.store_dir = replay_dir.path.string();
    cfg.auto_register = true;
    auto fresh = Platform::open(cfg);
    REQUIRE(fresh.ok());
    store::ReplayOptions opts;
    opts.from = 0;
    opts.to = kBase + 30 * model::kMillisPerDay;
    opts.speed = 0.0;  // as fast as possible
    auto report = store::replay(raw, opts, [&](const Reading& r) {
      return fresh.value()->submit_reading(r).ok();
    });
    REQUIRE(report.ok());
    CHECK(report.value().delivered == 2000);
    fresh.value()->flush();
    CHECK(fresh.value()->summaries().export_canonical() == original_export);
  }
}

TEST_CASE("replay paces, reports, and surfaces sink failures") {
  TempDir dir;
  store::RawLog raw(dir.path);
  for (int i = 0; i < 1000; ++i)
    REQUIRE(raw.append(reading("t", kBase + i * 60'000, double(i))).ok());

  SUBCASE("speed max delivers everything almost instantly") {
    store::ReplayOptions opts;
    opts.from = kBase;
    opts.to = kBase + model::kMillisPerDay;
    opts.speed = 0.0;
    std::uint64_t n = 0;
    auto report = store::replay(raw, opts, [&](const Reading&) {
      ++n;
      return true;
    });
    REQUIRE(report.ok());
    CHECK(n == 1000);
    CHECK(report.value().delivered == 1000);
    CHECK(report.value().wall_ms < 16 * 60'000.0);  // far below the 16.6 h span
  }
  SUBCASE("empty range reports zero") {
    store::ReplayOptions opts;
    opts.from = kBase + 40 * model::kMillisPerDay;
    opts.to = kBase + 41 * model::kMillisPerDay;
    auto report = store::replay(raw, opts, [](const Reading&) { return true; });
    REQUIRE(report.ok());
    CHECK(report.value().delivered == 0);
  }
  SUBCASE("sink failure aborts with position") {
    store::ReplayOptions opts;
    opts.from = kBase;
    opts.to = kBase + model::kMillisPerDay;
    int n = 0;
    auto report = store::replay(raw, opts, [&](const Reading&) { return ++n <= 10; });
    CHECK(report.code() == Errc::sink_failure);
  }
  SUBCASE("invalid range is rejected") {
    store::ReplayOptions opts;
    opts.from = kBase;
    opts.to = kBase;
    CHECK(store::replay(raw, opts, [](const Reading&) { return true; }).code() ==
          Errc::invalid_argument);
  }
}

TEST_CASE("pipeline quarantines readings for unregistered resources") {
  TempDir dir;
  PlatformConfig cfg;
  cfg.store_dir = dir.path.string();
  auto platform = Platform::open(cfg);
  REQUIRE(platform.ok());
  int injected = 7;
  for (int i = 0; i < injected; ++i) {
    auto st = platform.value()->ingest_message_sync(
        {"mystery/temperature", "20@" + std::to_string(kBase + i)}, 0);
    CHECK(st.code() == Errc::unknown_resource);
  }
  CHECK(platform.value()->raw().quarantined() == std::uint64_t(injected));
  CHECK(platform.value()->counters().unknown == std::uint64_t(injected));
}
