#include <doctest.h>

#include <random>

#include "engine/engine.hpp"
#include "oracles.hpp"

using namespace schoolsense;
using namespace schoolsense::engine;
using model::AggregationType;
using model::Granularity;
using model::Millis;
using model::Reading;
using model::Summary;

namespace {

const Millis kBase = model::parse_time("2017-09-30T10:00:00Z").value();

Reading reading(const std::string& id, Millis ts, double value) {
  Reading r;
  r.resource_id = id;
  r.device = id;
  r.sensor = "temperature";
  r.timestamp = ts;
  r.value = value;
  return r;
}

Engine make_engine(bool instrument = false) {
  EngineConfig cfg;
  cfg.instrument = instrument;
  return Engine(cfg);
}

}  // namespace

TEST_CASE("a single reading creates a singleton five-minute summary") {
  Engine e = make_engine();
  e.register_resource("t", AggregationType::Average);
  auto out = e.submit(reading("t", kBase + 137 * 1000, 20.0));  // 10:02:17
  REQUIRE(out.ok());
  REQUIRE(out.value().size() == 5);  // one summary per granularity
  const auto& five = out.value().front();
  CHECK(five.interval.granularity == Granularity::FiveMin);
  CHECK(five.interval.start == kBase);
  CHECK(five.value.avg == 20.0);
  CHECK(five.value.min == 20.0);
  CHECK(five.value.max == 20.0);
  CHECK(five.value.count == 1);
}

TEST_CASE("readings in one interval fold to mean, min, max, count") {
  Engine e = make_engine();
  e.register_resource("t", AggregationType::Average);
  e.submit(reading("t", kBase + 10'000, 10.0));
  e.submit(reading("t", kBase + 20'000, 20.0));
  auto out = e.submit(reading("t", kBase + 30'000, 30.0));
  REQUIRE(out.ok());
  const auto& five = out.value().front().value;
  CHECK(five.avg == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(five.min == 10.0);
  CHECK(five.max == 30.0);
  CHECK(five.count == 3);
}

TEST_CASE("twelve equal five-minute averages give the same hour average") {
  Engine e = make_engine();
  e.register_resource("t", AggregationType::Average);
  std::vector<model::IntervalSummary> last;
  for (int i = 0; i < 12; ++i) {
    auto out = e.submit(reading("t", kBase + i * model::kFiveMinutes, 2.0));
    REQUIRE(out.ok());
    last = out.value();
  }
  const auto& hour = last[1];
  CHECK(hour.interval.granularity == Granularity::Hour);
  CHECK(hour.value.avg == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(hour.value.count == 12);
}

TEST_CASE("hour average is the unweighted mean of present five-minute slots") {
  Engine e = make_engine();
  e.register_resource("t", AggregationType::Average);
  e.submit(reading("t", kBase, 10.0));
  auto out = e.submit(reading("t", kBase + 2 * model::kFiveMinutes, 20.0));
  REQUIRE(out.ok());
  const auto& hour = out.value()[1];
  CHECK(hour.interval.granularity == Granularity::Hour);
  // two populated children with averages 10 and 20; empty slots do not count
  CHECK(hour.value.avg == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("roll_up: day min/max come from hour summaries") {
  std::vector<Summary> hours;
  for (double v : {5.0, 7.0, 3.0}) {
    Summary s;
    s.avg = v;
    s.min = v;
    s.max = v;
    s.count = 1;
    hours.push_back(s);
  }
  auto day = roll_up(hours, AggregationType::Average);
  REQUIRE(day.ok());
  CHECK(day.value().min == 3.0);
  CHECK(day.value().max == 7.0);
  CHECK(day.value().avg == doctest::Approx(5.0));
  CHECK(day.value().count == 3);
}

TEST_CASE("roll_up: totals add") {
  std::vector<Summary> children(2);
  children[0].sum = 1.5;
  children[0].avg = 0.75;
  children[0].count = 2;
  children[1].sum = 2.5;
  children[1].avg = 2.5;
  children[1].count = 1;
  auto parent = roll_up(children, AggregationType::Total);
  REQUIRE(parent.ok());
  CHECK(*parent.value().sum == doctest::Approx(4.0));
}

TEST_CASE("roll_up: mean of means deliberately differs from the weighted mean") {
  std::vector<Summary> children(2);
  children[0].avg = 10.0;
  children[0].min = 10.0;
  children[0].max = 10.0;
  children[0].count = 1;
  children[1].avg = 20.0;
  children[1].min = 20.0;
  children[1].max = 20.0;
  children[1].count = 9;
  auto parent = roll_up(children, AggregationType::Average);
  REQUIRE(parent.ok());
  CHECK(parent.value().avg == doctest::Approx(15.0));  // not the event-weighted 19.0
  CHECK(parent.value().count == 10);                   // counts preserve the weights
  CHECK(roll_up({}, AggregationType::Average).code() == Errc::empty_children);
}

TEST_CASE("power aggregation: watts from amps, energy from interval width") {
  model::IntervalKey interval{Granularity::FiveMin, kBase};
  PowerConfig power;  // 230 V

  SUBCASE("constant 10 A over five minutes") {
    std::vector<std::pair<double, Millis>> amps;
    for (int i = 0; i < 10; ++i) amps.push_back({10.0, kBase + i * 30'000});
    auto out = aggregate_power(amps, interval, power);
    REQUIRE(out.ok());
    CHECK(out.value().first == doctest::Approx(2300.0));
    CHECK(out.value().second == doctest::Approx(2300.0 * 300.0 / 3600.0));  // ~191.667 Wh
  }
  SUBCASE("zero current, zero energy") {
    auto out = aggregate_power({{0.0, kBase}}, interval, power);
    REQUIRE(out.ok());
    CHECK(out.value().first == 0.0);
    CHECK(out.value().second == 0.0);
  }
  SUBCASE("mean of 5 A and 15 A equals the constant case by linearity") {
    auto out = aggregate_power({{5.0, kBase}, {15.0, kBase + 30'000}}, interval, power);
    REQUIRE(out.ok());
    CHECK(out.value().first == doctest::Approx(2300.0));
    CHECK(out.value().second == doctest::Approx(191.6666666667).epsilon(1e-9));
  }
  SUBCASE("no samples is an error") {
    CHECK(aggregate_power({}, interval, power).code() == Errc::no_samples);
  }
}

TEST_CASE("duplicate (resource, timestamp) submissions change nothing") {
  Engine e = make_engine();
  e.register_resource("t", AggregationType::Average);
  REQUIRE(e.submit(reading("t", kBase + 1000, 20.0)).ok());
  auto dup = e.submit(reading("t", kBase + 1000, 99.0));
  REQUIRE(dup.ok());
  CHECK(dup.value().empty());
  CHECK(e.counters().duplicates == 1);
  auto out = e.submit(reading("t", kBase + 2000, 40.0));
  CHECK(out.value().front().value.avg == doctest::Approx(30.0));
  CHECK(out.value().front().value.count == 2);
}

TEST_CASE("readings older than the retention window are too old") {
  EngineConfig cfg;
  cfg.retained_slots = 4;
  Engine e(cfg);
  e.register_resource("t", AggregationType::Average);
  for (int i = 0; i < 6; ++i)
    REQUIRE(e.submit(reading("t", kBase + i * model::kFiveMinutes, 20.0)).ok());
  // slots for intervals 0 and 1 have been evicted
  auto too_old = e.submit(reading("t", kBase + 10'000, 21.0));
  CHECK(too_old.code() == Errc::too_old);
  CHECK(e.counters().too_old == 1);
  // late data inside the window still lands
  auto late = e.submit(reading("t", kBase + 3 * model::kFiveMinutes + 7'000, 26.0));
  REQUIRE(late.ok());
  CHECK(late.value().front().value.count == 2);
}

TEST_CASE("eviction keeps at most the configured slots per granularity") {
  EngineConfig cfg;
  cfg.retained_slots = 4;
  Engine e(cfg);
  std::vector<std::pair<model::ResourceId, model::IntervalKey>> evicted;
  e.set_evict_hook([&](const model::ResourceId& id, const model::IntervalKey& key) {
    evicted.push_back({id, key});
  });
  e.register_resource("t", AggregationType::Average);
  for (int i = 0; i < 10; ++i)
    REQUIRE(e.submit(reading("t", kBase + i * model::kFiveMinutes, 20.0)).ok());
  CHECK(e.resident_slots() <= 4 * 5u);
  REQUIRE(evicted.size() == 6);
  CHECK(evicted.front().second.start == kBase);  // oldest first
}

TEST_CASE("unregistered resources are rejected and counted") {
  Engine e = make_engine();
  auto out = e.submit(reading("ghost", kBase, 1.0));
  CHECK(out.code() == Errc::unknown_resource);
  CHECK(e.counters().unknown_resource == 1);
}

TEST_CASE("submission order within the window does not change final summaries") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Reading> log;
    std::map<model::ResourceId, AggregationType> types{{"t", AggregationType::Average},
                                                       {"p", AggregationType::Power}};
    for (int i = 0; i < 200; ++i) {
      // all inside one hour: reorderings stay within the 48-slot window
      Millis ts = kBase + Millis(rng() % (model::kMillisPerHour));
      if (rng() % 2)
        log.push_back(reading("t", ts, double(rng() % 400) / 10.0));
      else {
        Reading r = reading("p", ts, double(rng() % 200) / 10.0);
        r.sensor = "current";
        log.push_back(r);
      }
    }
    auto run = [&](const std::vector<Reading>& ordered) {
      Engine e = make_engine();
      e.register_resource("t", AggregationType::Average);
      e.register_resource("p", AggregationType::Power);
      std::map<oracle::Key, Summary> finals;
      for (const auto& r : ordered) {
        auto out = e.submit(r);
        REQUIRE(out.ok());
        for (const auto& s : out.value())
          finals[{s.resource_id, s.interval.granularity, s.interval.start}] = s.value;
      }
      return finals;
    };
    auto a = run(log);
    std::vector<Reading> shuffled = log;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto b = run(shuffled);
    REQUIRE(a.size() == b.size());
    for (const auto& [key, s] : a) {
      REQUIRE(b.count(key));
      CHECK(s == b.at(key));  // bit-identical, not just close
    }
  }
}

TEST_CASE("engine summaries match brute-force recomputation at every granularity") {
  std::mt19937_64 rng(4242);
  std::map<model::ResourceId, AggregationType> types{
      {"avg1", AggregationType::Average},
      {"rain", AggregationType::Total},
      {"power", AggregationType::Power},
  };
  std::vector<Reading> log;
  for (int i = 0; i < 3000; ++i) {
    // two days of data, delivered in time order with small jitter
    Millis ts = kBase + Millis(i) * 57'600 + Millis(rng() % 50'000);
    double v = 5.0 + double(rng() % 1000) / 37.0;
    const char* ids[3] = {"avg1", "rain", "power"};
    log.push_back(reading(ids[rng() % 3], ts, v));
  }
  std::stable_sort(log.begin(), log.end(),
                   [](const Reading& a, const Reading& b) { return a.timestamp < b.timestamp; });

  Engine e = make_engine();
  std::map<oracle::Key, Summary> finals;
  for (const auto& [id, type] : types) e.register_resource(id, type);
  for (const auto& r : log) {
    auto out = e.submit(r);
    REQUIRE(out.ok());
    for (const auto& s : out.value())
      finals[{s.resource_id, s.interval.granularity, s.interval.start}] = s.value;
  }
  auto expected = oracle::recompute(log, types);
  REQUIRE(finals.size() == expected.size());
  for (const auto& [key, want] : expected) {
    REQUIRE(finals.count(key));
    CHECK(oracle::summaries_close(finals.at(key), want));
  }
}

TEST_CASE("energy is additive up the cascade") {
  Engine e = make_engine();
  e.register_resource("p", AggregationType::Power);
  std::mt19937_64 rng(5);
  std::map<oracle::Key, Summary> finals;
  for (int i = 0; i < 500; ++i) {
    Reading r = reading("p", kBase + Millis(i) * 173'000, double(rng() % 300) / 10.0);
    auto out = e.submit(r);
    REQUIRE(out.ok());
    for (const auto& s : out.value())
      finals[{s.resource_id, s.interval.granularity, s.interval.start}] = s.value;
  }
  auto sum_level = [&](Granularity g) {
    double total = 0;
    for (const auto& [key, s] : finals)
      if (key.g == g && s.energy_wh) total += *s.energy_wh;
    return total;
  };
  double five = sum_level(Granularity::FiveMin);
  CHECK(oracle::close(sum_level(Granularity::Hour), five));
  CHECK(oracle::close(sum_level(Granularity::Day), five));
  CHECK(oracle::close(sum_level(Granularity::Month), five));
  CHECK(oracle::close(sum_level(Granularity::Year), five));
}

TEST_CASE("containment: parent min/max bound every child") {
  Engine e = make_engine();
  e.register_resource("t", AggregationType::Average);
  std::mt19937_64 rng(6);
  std::map<oracle::Key, Summary> finals;
  for (int i = 0; i < 800; ++i) {
    auto out = e.submit(reading("t", kBase + Millis(i) * 61'000, double(rng() % 600) / 7.0));
    REQUIRE(out.ok());
    for (const auto& s : out.value())
      finals[{s.resource_id, s.interval.granularity, s.interval.start}] = s.value;
  }
  for (const auto& [key, s] : finals) {
    if (key.g == Granularity::Year) continue;
    Granularity pg = model::kAllGranularities[std::size_t(key.g) + 1];
    oracle::Key pk{key.resource, pg, model::align(key.start, pg).start};
    REQUIRE(finals.count(pk));
    CHECK(finals.at(pk).min <= s.min);
    CHECK(finals.at(pk).max >= s.max);
  }
}

TEST_CASE("latency reporting covers exactly the submitted types") {
  Engine e = make_engine(true);
  e.register_resource("t", AggregationType::Average);
  e.register_resource("r", AggregationType::Total);
  for (int i = 0; i < 1000; ++i)
    REQUIRE(e.submit(reading("t", kBase + i * 1000, 20.0)).ok());
  for (int i = 0; i < 10; ++i)
    REQUIRE(e.submit(reading("r", kBase + i * 1000, 0.2)).ok());

  auto report = e.latency_report();
  REQUIRE(report.size() == 2);  // no POWER row: no POWER submissions
  for (const auto& row : report) {
    CHECK(row.type != AggregationType::Power);
    CHECK(row.mean_ms >= 0.0);
    CHECK(row.median_ms <= row.p99_ms);
    if (row.type == AggregationType::Average) CHECK(row.count == 1000);
    if (row.type == AggregationType::Total) CHECK(row.count == 10);
  }
}
