#include "doctest.h"
#include "streamsync/config.hpp"

using namespace streamsync;

TEST_CASE("durations parse with unit suffixes") {
  CHECK(parse_duration("33ms") == 33_ms);
  CHECK(parse_duration("0.5s") == 500_ms);
  CHECK(parse_duration("100us") == 100_us);
  CHECK(parse_duration("7ns") == 7);
  CHECK(parse_duration("2s") == 2_s);
  CHECK(parse_duration(" 10ms ") == 10_ms);
  CHECK(parse_duration("0") == 0);
  CHECK_THROWS_AS(parse_duration("33"), std::invalid_argument);
  CHECK_THROWS_AS(parse_duration("ms"), std::invalid_argument);
  CHECK_THROWS_AS(parse_duration(""), std::invalid_argument);
}

TEST_CASE("config text overrides defaults and rejects unknown keys") {
  const ExperimentConfig c = parse_config_string(
      "# example experiment\n"
      "devices = 3\n"
      "trials = 10\n"
      "seed = 99\n"
      "camera.period = 16ms   # comment after value\n"
      "filter.kind = mean\n"
      "align.method = reset\n"
      "align.tolerance = 1ms\n"
      "latency.spike_probability = 0.02\n"
      "naive.mode = none\n");
  CHECK(c.devices == 3);
  CHECK(c.trials == 10);
  CHECK(c.seed == 99);
  CHECK(c.camera.period == 16_ms);
  CHECK(c.filter.kind == FilterKind::mean);
  CHECK(c.align_method == AlignMethod::reset_sampling);
  CHECK(c.align_tolerance == 1_ms);
  CHECK(c.spike_probability == doctest::Approx(0.02));
  CHECK_FALSE(c.naive.has_value());

  CHECK_THROWS_AS(parse_config_string("no_such_key = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_string("devices\n"), std::invalid_argument);
}

TEST_CASE("naive mode parses with optional overrides") {
  const ExperimentConfig c = parse_config_string(
      "naive.mode = wifi\n"
      "oracle.tau = 20ms\n"
      "oracle.exposure = 100us\n");
  REQUIRE(c.naive.has_value());
  CHECK(c.naive->mode == "wifi");
  CHECK(c.naive->mean == 0);  // built-in default applies

  CHECK_THROWS_AS(parse_config_string("naive.mode = pigeon\n"), std::invalid_argument);
}

TEST_CASE("validation rejects inconsistent settings") {
  ExperimentConfig c = default_config();
  c.devices = 1;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);

  c = default_config();
  c.align_tolerance = c.camera.period;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);

  c = default_config();
  c.oracle_exposure = c.oracle_tau;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);

  c = default_config();
  c.spike_probability = 2.0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
}

TEST_CASE("default latency calibration matches the published table") {
  const ExperimentConfig c = default_config();
  const LatencyModel model = c.latency_model();
  CHECK(model.analytic_mean(Direction::leader_to_client) == doctest::Approx(1133e3).epsilon(0.001));
  CHECK(model.analytic_mean(Direction::client_to_leader) == doctest::Approx(1878e3).epsilon(0.001));
  CHECK(c.latency_leader_to_client.base == 517_us);
  CHECK(c.latency_client_to_leader.base == 479_us);
  CHECK(model.asymmetry_delta() == doctest::Approx(745e3).epsilon(0.001));
}
