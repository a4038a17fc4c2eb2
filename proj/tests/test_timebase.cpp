#include "doctest.h"
#include "streamsync/timebase.hpp"

using namespace streamsync;

TEST_CASE("cross-domain timestamp arithmetic is rejected") {
  const Timestamp leader{100, ClockDomain::leader()};
  const Timestamp client{100, ClockDomain::client(1)};
  CHECK_THROWS_AS((void)(leader - client), DomainMismatch);
  CHECK_THROWS_AS((void)(leader < client), DomainMismatch);
  CHECK((leader - Timestamp{40, ClockDomain::leader()}) == 60);
}

TEST_CASE("clock_read maps reference time through offset and drift") {
  SUBCASE("identity") {
    const LocalClock clock(ClockDomain::leader(), 0);
    const Timestamp t = clock.read(Timestamp{5000, ClockDomain::reference()});
    CHECK(t.nanos == 5000);
    CHECK(t.domain == ClockDomain::leader());
  }
  SUBCASE("pure translation") {
    const LocalClock clock(ClockDomain::client(1), 100_us);
    CHECK(clock.read(Timestamp{0, ClockDomain::reference()}).nanos == 100_us);
  }
  SUBCASE("drift term") {
    const LocalClock clock(ClockDomain::client(1), 0, 1e-6);
    // 1 s of reference time gains 1 us at a drift of 1e-6.
    CHECK(clock.read(Timestamp{1_s, ClockDomain::reference()}).nanos == 1_s + 1_us);
  }
  SUBCASE("rejects non-reference input") {
    const LocalClock clock(ClockDomain::client(1), 0);
    CHECK_THROWS_AS(clock.read(Timestamp{0, ClockDomain::leader()}), DomainMismatch);
  }
}

TEST_CASE("clock_read with zero drift is a bijection") {
  const LocalClock clock(ClockDomain::client(2), -7321_ns);
  for (Duration ref : {-1'000'000'000LL, -17LL, 0LL, 12'345LL, 3'600'000'000'000LL}) {
    const Timestamp local = clock.read(Timestamp{ref, ClockDomain::reference()});
    CHECK(clock.to_reference(local).nanos == ref);
  }
}

TEST_CASE("clock_read is strictly monotone for drift > -1") {
  const LocalClock clock(ClockDomain::client(1), 5_ms, -0.5);
  Duration prev = clock.read(Timestamp{0, ClockDomain::reference()}).nanos;
  for (Duration ref = 1000; ref <= 100'000; ref += 1000) {
    const Duration cur = clock.read(Timestamp{ref, ClockDomain::reference()}).nanos;
    CHECK(cur > prev);
    prev = cur;
  }
  CHECK_THROWS_AS(LocalClock(ClockDomain::client(1), 0, -1.0), std::invalid_argument);
}

TEST_CASE("convert shifts by theta and round-trips exactly") {
  ClockEstimate estimate;
  estimate.theta = 100_us;
  estimate.client_domain = ClockDomain::client(1);
  estimate.leader_domain = ClockDomain::leader();

  const Timestamp client_ts{1'000'100_us, ClockDomain::client(1)};
  const Timestamp in_leader = convert(client_ts, estimate, ClockDomain::leader());
  CHECK(in_leader.nanos == 1'000'000_us);
  CHECK(in_leader.domain == ClockDomain::leader());

  SUBCASE("theta zero changes only the tag") {
    ClockEstimate zero = estimate;
    zero.theta = 0;
    const Timestamp converted = convert(client_ts, zero, ClockDomain::leader());
    CHECK(converted.nanos == client_ts.nanos);
  }
  SUBCASE("round trip is the identity") {
    const Timestamp back = convert(in_leader, estimate, ClockDomain::client(1));
    CHECK(back.nanos == client_ts.nanos);
    CHECK(back.domain == ClockDomain::client(1));
  }
  SUBCASE("unrelated domain pair is rejected") {
    CHECK_THROWS_AS(convert(client_ts, estimate, ClockDomain::client(2)), DomainMismatch);
  }
}

TEST_CASE("floor_mod and half_round_away") {
  CHECK(floor_mod(7, 5) == 2);
  CHECK(floor_mod(-1, 5) == 4);
  CHECK(floor_mod(-10, 5) == 0);
  CHECK(half_round_away(5) == 3);
  CHECK(half_round_away(-5) == -3);
  CHECK(half_round_away(4) == 2);
  CHECK(half_round_away(-4) == -2);
}
