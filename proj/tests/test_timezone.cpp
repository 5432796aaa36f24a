#include <doctest.h>

#include <filesystem>

#include "model/timezone.hpp"

using namespace schoolsense;
using namespace schoolsense::model;

TEST_CASE("fixed offsets convert local wall time both ways") {
  auto tz = TimeZone::load("UTC+02:00");
  REQUIRE(tz.ok());
  Millis t = parse_time("2017-09-08T08:00:00Z").value();
  CHECK(tz.value().offset_ms_at(t) == 2 * kMillisPerHour);
  auto local = tz.value().to_local(t);
  CHECK(local.hour == 10);
  CHECK(local.date == CivilDate{2017, 9, 8});
  CHECK(tz.value().from_local(CivilDate{2017, 9, 8}, 10 * 60) == t);

  auto west = TimeZone::load("UTC-05:00");
  REQUIRE(west.ok());
  CHECK(west.value().local_date(parse_time("2017-09-08T03:00:00Z").value()) ==
        CivilDate{2017, 9, 7});
}

TEST_CASE("UTC is the identity zone") {
  auto tz = TimeZone::utc();
  Millis t = parse_time("2017-01-15T23:30:00Z").value();
  CHECK(tz.offset_ms_at(t) == 0);
  CHECK(tz.local_date(t) == CivilDate{2017, 1, 15});
}

TEST_CASE("unknown zone names fail to load") {
  CHECK(!TimeZone::load("Not/AZone").ok());
  CHECK(!TimeZone::load("UTC+99:00").ok());
}

TEST_CASE("IANA zones apply DST when zoneinfo is available") {
  if (!std::filesystem::exists("/usr/share/zoneinfo/Europe/Athens")) {
    MESSAGE("zoneinfo not installed; skipping IANA checks");
    return;
  }
  auto tz = TimeZone::load("Europe/Athens");
  REQUIRE(tz.ok());
  // summer: EEST = UTC+3, winter: EET = UTC+2
  CHECK(tz.value().offset_ms_at(parse_time("2017-07-01T12:00:00Z").value()) ==
        3 * kMillisPerHour);
  CHECK(tz.value().offset_ms_at(parse_time("2017-01-15T12:00:00Z").value()) ==
        2 * kMillisPerHour);
  // far future instants fall through to the footer rule
  CHECK(tz.value().offset_ms_at(parse_time("2045-07-01T12:00:00Z").value()) ==
        3 * kMillisPerHour);
  CHECK(tz.value().offset_ms_at(parse_time("2045-01-15T12:00:00Z").value()) ==
        2 * kMillisPerHour);
  // local school start 08:30 on a summer day maps to 05:30 UTC
  CHECK(tz.value().from_local(CivilDate{2017, 9, 8}, 8 * 60 + 30) ==
        parse_time("2017-09-08T05:30:00Z").value());
}
