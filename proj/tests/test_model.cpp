#include <doctest.h>

#include <random>

#include "model/time.hpp"
#include "model/topology.hpp"
#include "model/types.hpp"

using namespace schoolsense;
using namespace schoolsense::model;

TEST_CASE("align floors to the 5-minute boundary") {
  Millis t = parse_time("2017-09-30T10:02:17Z").value();
  IntervalKey k = align(t, Granularity::FiveMin);
  CHECK(k.start == parse_time("2017-09-30T10:00:00Z").value());
}

TEST_CASE("align is a fixed point on boundaries") {
  Millis t = parse_time("2017-09-30T10:00:00Z").value();
  CHECK(align(t, Granularity::FiveMin).start == t);
}

TEST_CASE("align floors to the calendar day") {
  Millis t = parse_time("2017-09-30T23:59:59Z").value();
  CHECK(align(t, Granularity::Day).start == parse_time("2017-09-30T00:00:00Z").value());
}

TEST_CASE("calendar months and years have variable width") {
  Millis feb = parse_time("2016-02-10T12:00:00Z").value();  // leap year
  IntervalKey m = align(feb, Granularity::Month);
  CHECK(m.start == parse_time("2016-02-01T00:00:00Z").value());
  CHECK(width_ms(m) == 29 * kMillisPerDay);
  IntervalKey y = align(feb, Granularity::Year);
  CHECK(y.start == parse_time("2016-01-01T00:00:00Z").value());
  CHECK(width_ms(y) == 366 * kMillisPerDay);
}

TEST_CASE("align containment, idempotence and nesting over random instants") {
  std::mt19937_64 rng(20170930);
  std::uniform_int_distribution<Millis> dist(1, 4102444800000LL);  // through 2099
  for (int i = 0; i < 5000; ++i) {
    Millis t = dist(rng);
    IntervalKey prev{};
    for (std::size_t gi = 0; gi < kAllGranularities.size(); ++gi) {
      Granularity g = kAllGranularities[gi];
      IntervalKey k = align(t, g);
      // containment: start <= t < start + width
      CHECK(k.start <= t);
      CHECK(t < next_start(k));
      // idempotence
      CHECK(align(k.start, g) == k);
      // nesting: the finer interval lies wholly inside the coarser one
      if (gi > 0) {
        CHECK(prev.start >= k.start);
        CHECK(next_start(prev) <= next_start(k));
      }
      prev = k;
    }
  }
}

TEST_CASE("parse_time accepts ISO and epoch forms") {
  CHECK(parse_time("1504857600000") == Millis(1504857600000));
  CHECK(parse_time("2017-09-08") == Millis(1504828800000));
  CHECK(parse_time("2017-09-08T08:00:00Z") == Millis(1504857600000));
  CHECK(parse_time("2017-09-08T08:00:00.250Z") == Millis(1504857600250));
  CHECK(!parse_time("nonsense"));
  CHECK(!parse_time("2017-13-01"));
  CHECK(format_iso8601(1504857600000) == "2017-09-08T08:00:00Z");
}

TEST_CASE("aggregation type follows sensor specials then kind") {
  CHECK(aggregation_for(ResourceKind::Environmental, "temperature") ==
        AggregationType::Average);
  CHECK(aggregation_for(ResourceKind::Weather, "precipitation") == AggregationType::Total);
  CHECK(aggregation_for(ResourceKind::Power, "current") == AggregationType::Power);
  CHECK(aggregation_for(ResourceKind::Weather, "wind_speed") == AggregationType::Average);
}

TEST_CASE("topology round-trips through JSON") {
  Topology topo;
  SiteTopology site;
  site.site_id = "site-A";
  site.name = "Test School";
  site.timezone = "UTC+02:00";
  site.incorporated = CivilDate{2015, 10, 1};
  site.rooms.push_back({"R1", "SW"});
  ResourceDescriptor d;
  d.device = "124B00061ED466";
  d.sensor = "temperature";
  d.resource_id = "124B00061ED466.temperature";
  d.kind = ResourceKind::Environmental;
  d.units = "C";
  d.site_id = "site-A";
  d.room_id = "R1";
  site.resources.push_back(d);
  topo.sites.push_back(site);

  auto parsed = parse_topology_json(topology_to_json(topo));
  REQUIRE(parsed.ok());
  REQUIRE(parsed.value().sites.size() == 1);
  const auto& s = parsed.value().sites[0];
  CHECK(s.site_id == "site-A");
  CHECK(s.timezone == "UTC+02:00");
  CHECK(s.incorporated == CivilDate{2015, 10, 1});
  CHECK(s.school_hours.start_minutes == 8 * 60 + 30);
  CHECK(s.school_hours.end_minutes == 16 * 60 + 30);
  REQUIRE(s.resources.size() == 1);
  CHECK(s.resources[0].resource_id == "124B00061ED466.temperature");
  CHECK(s.resources[0].room_id == std::optional<std::string>("R1"));
}

TEST_CASE("duplicate device/sensor pairs are rejected") {
  const char* text = R"({"sites":[{"site_id":"A","resources":[
    {"device":"d1","sensor":"temperature"},
    {"device":"d1","sensor":"temperature"}]}]})";
  auto parsed = parse_topology_json(text);
  CHECK(!parsed.ok());
  CHECK(parsed.code() == Errc::invalid_config);
}
