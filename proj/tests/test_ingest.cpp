#include <doctest.h>

#include <random>
#include <thread>

#include "ingest/bus.hpp"
#include "ingest/listener.hpp"
#include "query/directory.hpp"

using namespace schoolsense;
using namespace schoolsense::ingest;
using model::Millis;
using model::Reading;

namespace {

query::Directory directory_with(const std::string& device, const std::string& sensor) {
  query::Directory dir;
  model::ResourceDescriptor d;
  d.device = device;
  d.sensor = sensor;
  d.kind = model::ResourceKind::Environmental;
  REQUIRE(dir.register_resource(d).ok());
  return dir;
}

}  // namespace

TEST_CASE("bus message with device/sensor topic parses to a reading") {
  auto dir = directory_with("124B00061ED466", "temperature");
  auto r = parse_bus_message({"124B00061ED466/temperature", "20"}, 1504857600000, dir);
  REQUIRE(r.ok());
  CHECK(r.value().device == "124B00061ED466");
  CHECK(r.value().sensor == "temperature");
  CHECK(r.value().value == 20.0);
  CHECK(r.value().timestamp == 1504857600000);  // stamped at arrival
  CHECK(r.value().resource_id == "124B00061ED466.temperature");
}

TEST_CASE("topic without a sensor segment is malformed") {
  auto dir = directory_with("124B00061ED466", "temperature");
  auto r = parse_bus_message({"124B00061ED466", "20"}, 1, dir);
  CHECK(r.code() == Errc::malformed_topic);
}

TEST_CASE("three topic segments are malformed") {
  auto dir = directory_with("A", "B");
  CHECK(parse_bus_message({"A/B/C", "1"}, 1, dir).code() == Errc::malformed_topic);
  CHECK(parse_bus_message({"/B", "1"}, 1, dir).code() == Errc::malformed_topic);
  CHECK(parse_bus_message({"A/", "1"}, 1, dir).code() == Errc::malformed_topic);
}

TEST_CASE("non-numeric payload is malformed") {
  auto dir = directory_with("d", "temperature");
  CHECK(parse_bus_message({"d/temperature", "warm"}, 1, dir).code() == Errc::malformed_payload);
  CHECK(parse_bus_message({"d/temperature", "nan"}, 1, dir).code() == Errc::malformed_payload);
  CHECK(parse_bus_message({"d/temperature", ""}, 1, dir).code() == Errc::malformed_payload);
  CHECK(parse_bus_message({"d/temperature", "20@"}, 1, dir).code() == Errc::malformed_payload);
}

TEST_CASE("unregistered pairs are rejected unless auto-registration is on") {
  auto dir = directory_with("d", "temperature");
  CHECK(parse_bus_message({"x/temperature", "20"}, 1, dir).code() == Errc::unknown_resource);
  ParseOptions opts;
  opts.auto_register = true;
  auto r = parse_bus_message({"x/temperature", "20"}, 1, dir, opts);
  REQUIRE(r.ok());
  CHECK(dir.resolve("x", "temperature").has_value());
}

TEST_CASE("payload timestamp suffix overrides the arrival stamp") {
  auto dir = directory_with("d", "temperature");
  auto r = parse_bus_message({"d/temperature", "21.5@1504857600123"}, 42, dir);
  REQUIRE(r.ok());
  CHECK(r.value().value == 21.5);
  CHECK(r.value().timestamp == 1504857600123);
}

TEST_CASE("parse is total: exactly one outcome per message") {
  auto dir = directory_with("d", "temperature");
  std::mt19937_64 rng(7);
  const std::string alphabet = "d/temperature 0123456789.@-e";
  for (int i = 0; i < 2000; ++i) {
    BusMessage msg;
    std::size_t tlen = rng() % 24;
    std::size_t plen = rng() % 16;
    for (std::size_t k = 0; k < tlen; ++k) msg.topic += alphabet[rng() % alphabet.size()];
    for (std::size_t k = 0; k < plen; ++k) msg.payload += alphabet[rng() % alphabet.size()];
    auto r = parse_bus_message(msg, 1, dir);
    if (r.ok()) {
      CHECK(r.value().timestamp > 0);
      CHECK(std::isfinite(r.value().value));
    } else {
      Errc c = r.code();
      bool expected = c == Errc::malformed_topic || c == Errc::malformed_payload ||
                      c == Errc::unknown_resource;
      CHECK(expected);
    }
  }
}

TEST_CASE("format then parse reproduces the reading") {
  auto dir = directory_with("d", "temperature");
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    Reading r;
    r.device = "d";
    r.sensor = "temperature";
    r.resource_id = "d.temperature";
    r.value = std::ldexp(double(rng() >> 11), -30) - 8000.0;
    r.timestamp = Millis(1 + rng() % 4102444800000LL);
    auto round = parse_bus_message(format_bus_message(r), 999, dir);
    REQUIRE(round.ok());
    CHECK(round.value().value == r.value);  // shortest round-trip formatting
    CHECK(round.value().timestamp == r.timestamp);
  }
}

TEST_CASE("poll cycle advances the cursor and drops seen records") {
  auto make = [](Millis ts) {
    Reading r;
    r.resource_id = "d.temperature";
    r.device = "d";
    r.sensor = "temperature";
    r.value = 1.0;
    r.timestamp = ts;
    return r;
  };
  PollSource src;
  src.source_id = "vendor";
  src.cursor = 1000;

  SUBCASE("new records move the cursor forward") {
    auto out = poll_cycle(src, [&](Millis) -> Result<std::vector<Reading>> {
      return std::vector<Reading>{make(1000 + 60000), make(1000 + 120000)};
    });
    REQUIRE(out.ok());
    CHECK(out.value().size() == 2);
    CHECK(out.value()[0].timestamp < out.value()[1].timestamp);
    CHECK(src.cursor == 1000 + 120000);
  }

  SUBCASE("already-seen records are suppressed") {
    auto out = poll_cycle(src, [&](Millis) -> Result<std::vector<Reading>> {
      return std::vector<Reading>{make(1000)};
    });
    REQUIRE(out.ok());
    CHECK(out.value().empty());
    CHECK(src.cursor == 1000);
  }

  SUBCASE("fetch failure leaves the cursor untouched") {
    auto out = poll_cycle(src, [&](Millis) -> Result<std::vector<Reading>> {
      return Error{Errc::io_failure, "connection refused"};
    });
    CHECK(out.code() == Errc::source_unavailable);
    CHECK(src.cursor == 1000);
  }

  SUBCASE("polling never emits a timestamp at or before the previous cursor") {
    std::mt19937_64 rng(3);
    for (int cycle = 0; cycle < 50; ++cycle) {
      Millis before = src.cursor;
      auto out = poll_cycle(src, [&](Millis) -> Result<std::vector<Reading>> {
        std::vector<Reading> batch;
        for (int i = 0; i < 8; ++i) batch.push_back(make(before + Millis(rng() % 9000) - 3000));
        return batch;
      });
      REQUIRE(out.ok());
      for (const auto& r : out.value()) CHECK(r.timestamp > before);
    }
  }
}

TEST_CASE("forward delivers into the queue and reports backpressure") {
  SubmitQueue q(2);
  Reading r;
  r.resource_id = "d.temperature";
  r.timestamp = 1;
  r.value = 1.0;
  CHECK(forward(r, q).ok());
  CHECK(forward(r, q).ok());
  ForwardPolicy fast;
  fast.max_attempts = 2;
  fast.initial_backoff_us = 10;
  CHECK(forward(r, q, fast).code() == Errc::backpressure);
  CHECK(q.size() == 2);
  q.pop();
  CHECK(forward(r, q, fast).ok());
}

TEST_CASE("line listener feeds complete lines in order") {
  LineListener listener;
  std::mutex mu;
  std::vector<std::string> got;
  REQUIRE(listener.start("127.0.0.1:0", [&](const std::string& line) {
                    std::lock_guard lock(mu);
                    got.push_back(line);
                  })
              .ok());
  LineSender sender;
  REQUIRE(sender.connect("127.0.0.1:" + std::to_string(listener.bound_port())).ok());
  REQUIRE(sender.send_line("d/temperature\t20@1504857600000").ok());
  REQUIRE(sender.send_line("d/temperature\t21@1504857630000").ok());
  for (int i = 0; i < 100; ++i) {
    {
      std::lock_guard lock(mu);
      if (got.size() == 2) break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  listener.stop();
  REQUIRE(got.size() == 2);
  CHECK(got[0] == "d/temperature\t20@1504857600000");
  auto msg = from_line(got[1]);
  REQUIRE(msg.has_value());
  CHECK(msg->topic == "d/temperature");
  CHECK(msg->payload == "21@1504857630000");
}
