#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "uavmtd/config.hpp"

using namespace uavmtd;

TEST_CASE("empty file gives reference defaults") {
  const auto c = parse_config("");
  CHECK(c.n_uavs == 5);
  CHECK(c.steps_per_episode == 50);
  CHECK(c.gamma == doctest::Approx(0.99));
  CHECK(c.n_channels == 5);
  CHECK(c.comm_range == 500.0);
  CHECK(c.hidden_sizes == std::vector<int>{64, 64});
  CHECK(c.reward.connectivity == 0.5);
  CHECK(c.reward.formation == 0.5);
  CHECK(c.reward.velocity == 1.0);
  CHECK(c.reward.attack == 2.0);
  CHECK(c.reward.cost == 0.5);
  CHECK(c.observation_dim() == 17);
  CHECK(c.tau_eff() == 20.0);
  CHECK(c.angular_speed() == doctest::Approx(0.05));
}

TEST_CASE("gamma out of range is rejected") {
  CHECK_THROWS_AS(parse_config("gamma = 1.5\n"), ConfigError);
  try {
    parse_config("gamma = 1.5\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("gamma") != std::string::npos);
  }
}

TEST_CASE("single key override") {
  const auto c = parse_config("n_uavs = 8\n");
  CHECK(c.n_uavs == 8);
  ScenarioConfig d;
  d.n_uavs = 8;
  CHECK(c == d);
}

TEST_CASE("comments, blanks and lists") {
  const auto c = parse_config(
      "# header\n\n  hidden_sizes = 32, 16  # trailing\nreward_coeffs = 1,2,3,4,5\nbuffer_capacity = 2e4\n");
  CHECK(c.hidden_sizes == std::vector<int>{32, 16});
  CHECK(c.reward.connectivity == 1.0);
  CHECK(c.reward.cost == 5.0);
  CHECK(c.buffer_capacity == 20000);
}

TEST_CASE("malformed input") {
  CHECK_THROWS_AS(parse_config("no_equals_sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("bogus_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_uavs = five\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_uavs = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("reward_coeffs = 1,2\n"), ConfigError);
}

TEST_CASE("invariants") {
  CHECK_THROWS_AS(parse_config("v_pat = 25\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("d_min = 400\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("steps_per_episode = 10\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("entropy_coeff = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("dt = 0\n"), ConfigError);
  CHECK_NOTHROW(parse_config("gamma = 0\n"));
  CHECK_NOTHROW(parse_config("gamma = 1\n"));
}

TEST_CASE("serialize round trip") {
  ScenarioConfig c;
  c.n_uavs = 7;
  c.gamma = 0.97;
  c.lr = 3.3e-4;
  c.hidden_sizes = {16, 8, 4};
  c.aggregation_weighting = AggregationWeighting::shifted;
  c.power.c3 = 0.1;
  CHECK(parse_config(serialize(c)) == c);
  CHECK(parse_config(serialize(ScenarioConfig{})) == ScenarioConfig{});
}

TEST_CASE("load_config from file") {
  const auto path = std::filesystem::temp_directory_path() / "uavmtd_test_config.cfg";
  {
    std::ofstream f(path);
    f << "n_channels = 3\n";
  }
  CHECK(load_config(path).n_channels == 3);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(path), ConfigError);
}
