#include <catch2/catch_amalgamated.hpp>

#include "bft/runconfig.hpp"

using namespace bft;
using namespace bft::cli;

TEST_CASE("run config is fail-closed on unknown keys") {
  RunConfig c;
  REQUIRE_THROWS_AS(c.apply({{"sede", 1}}), config_error);
  REQUIRE_THROWS_AS(c.apply({{"scene", {{"tx_watts", 1.0}}}}), config_error);
  REQUIRE_THROWS_AS(c.apply({{"planner", {{"stepsize", 5.0}}}}), config_error);
  REQUIRE_THROWS_AS(c.apply({{"version", 9}}), config_error);
}

TEST_CASE("run config applies partial overrides and keeps defaults") {
  RunConfig c;
  c.apply({{"seed", 99}, {"scene", {{"noise_sigma_db", 9.0}}}});
  REQUIRE(c.seed == 99);
  REQUIRE(c.scene.noise_sigma_db == 9.0);
  REQUIRE(c.scene.tx_power_dbm == 30.0);       // untouched defaults
  REQUIRE(c.scene.carrier_ghz == 28.0);
  REQUIRE(c.codebook.num_beams == 32);
  REQUIRE(c.train.batch_size == 64);
  REQUIRE(c.train.lr == 1e-3);
  REQUIRE(c.planner.step_size == 5.0);
}

TEST_CASE("run config digest tracks every field") {
  RunConfig a, b;
  REQUIRE(a.digest() == b.digest());
  b.apply({{"scene", {{"noise_sigma_db", 9.0}}}});
  REQUIRE(a.digest() != b.digest());
  RunConfig c;
  c.apply({{"profile", {{"kind", "pedestrian"}}}});
  REQUIRE(c.digest() != a.digest());
}

TEST_CASE("invalid values are rejected with config errors") {
  RunConfig c;
  REQUIRE_THROWS_AS(c.apply({{"profile", {{"kind", "submarine"}}}}), config_error);
  REQUIRE_THROWS_AS(c.apply({{"scene", {{"n_samples", 0}}}}), config_error);
  REQUIRE_THROWS_AS(c.apply({{"planner", {{"step_size", -1.0}}}}), config_error);
}
