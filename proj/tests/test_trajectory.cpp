#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "bft/trajectory.hpp"

using namespace bft;
using namespace bft::traj;
using Catch::Matchers::WithinAbs;

namespace {
grid::OccupancyGrid desk_grid() { return grid::generate_city_grid(42, 64, 64, 1.0, {6, 6, 14}); }
}  // namespace

TEST_CASE("pedestrian steps stay within the speed bound") {
  const auto g = desk_grid();
  const auto profile = MotionProfile::pedestrian();
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto t = generate_trajectory(g, profile, 10, seed);
    REQUIRE(t.length() == 10);
    REQUIRE(t.t_obs == 7);  // ceil(2L/3)
    for (int l = 1; l < t.length(); ++l) {
      const double step = dist(t.positions[l - 1], t.positions[l]);
      REQUIRE(step <= profile.max_step_m() + 1e-9);
    }
    REQUIRE_NOTHROW(validate_trajectory(g, t, profile));
  }
}

TEST_CASE("stop_prob = 1 produces a stationary path") {
  const auto g = desk_grid();
  MotionProfile p = MotionProfile::pedestrian();
  p.stop_prob = 1.0;
  const auto t = generate_trajectory(g, p, 8, 5);
  for (int l = 1; l < t.length(); ++l) REQUIRE(t.positions[l] == t.positions[0]);
}

TEST_CASE("same inputs reproduce id and positions exactly") {
  const auto g = desk_grid();
  const auto profile = MotionProfile::vehicle();
  const auto a = generate_trajectory(g, profile, 12, 77);
  const auto b = generate_trajectory(g, profile, 12, 77);
  REQUIRE(a.id == b.id);
  REQUIRE(a.positions.size() == b.positions.size());
  for (std::size_t i = 0; i < a.positions.size(); ++i) REQUIRE(a.positions[i] == b.positions[i]);
  // id depends on every input
  REQUIRE(generate_trajectory(g, profile, 12, 78).id != a.id);
  REQUIRE(generate_trajectory(g, profile, 13, 77).id != a.id);
}

TEST_CASE("trajectory generation parameters are validated") {
  const auto g = desk_grid();
  REQUIRE_THROWS_AS(generate_trajectory(g, MotionProfile::pedestrian(), 1, 0), config_error);
  MotionProfile bad = MotionProfile::pedestrian();
  bad.turn_prob = 1.5;
  REQUIRE_THROWS_AS(generate_trajectory(g, bad, 10, 0), config_error);
}

TEST_CASE("no id collisions over 1e5 generations") {
  const auto g = desk_grid();
  const auto profile = MotionProfile::vehicle();
  const std::uint64_t gd = g.digest();
  std::set<std::uint64_t> ids;
  for (std::uint64_t s = 0; s < 100000; ++s) ids.insert(trajectory_id(s, profile, 10, gd));
  REQUIRE(ids.size() == 100000);
}

TEST_CASE("pedestrian corpora move strictly slower than vehicle corpora") {
  const auto g = desk_grid();
  auto mean_step = [&](const MotionProfile& p, std::uint64_t seed0) {
    double sum = 0;
    int n = 0;
    for (std::uint64_t s = 0; s < 40; ++s) {
      const auto t = generate_trajectory(g, p, 10, seed0 + s);
      for (int l = 1; l < t.length(); ++l) {
        sum += dist(t.positions[l - 1], t.positions[l]);
        ++n;
      }
    }
    return sum / n;
  };
  const double ped = mean_step(MotionProfile::pedestrian(), 100);
  const double veh = mean_step(MotionProfile::vehicle(), 200);
  REQUIRE(ped < veh);
  REQUIRE(ped < 1.6);   // ~5 km/h at 1 Hz
  REQUIRE(veh > 4.0);   // ~30 km/h at 1 Hz minus collision stalls
}

TEST_CASE("hybrid profile sits between pedestrian and vehicle") {
  const auto h = MotionProfile::hybrid();
  const auto p = MotionProfile::pedestrian();
  const auto v = MotionProfile::vehicle();
  REQUIRE(h.avg_speed > p.avg_speed);
  REQUIRE(h.avg_speed < v.avg_speed);
  REQUIRE_THAT(h.avg_speed, WithinAbs(0.5 * (p.avg_speed + v.avg_speed), 1e-12));
}

TEST_CASE("attach_fingerprints: shapes, stationarity, and shadow crossings") {
  const auto g = desk_grid();
  const auto cb = fp::BeamCodebook::uniform(32);
  fp::ChannelScene scene;
  scene.tx_position = grid::nearest_free_position(g, {32, 32});
  scene.sampling_freq_hz = 1.25e8;

  SECTION("vehicle path of length 15 gets 15 fingerprints of 32 x N_s") {
    const auto t0 = generate_trajectory(g, MotionProfile::vehicle(), 15, 3);
    const auto t = attach_fingerprints(t0, g, cb, scene, 9);
    REQUIRE(t.fingerprints.size() == 15);
    for (const auto& f : t.fingerprints) {
      REQUIRE(f.beams() == 32);
      REQUIRE(f.samples() == scene.n_samples);
    }
    REQUIRE_NOTHROW(validate_trajectory(g, t, MotionProfile::vehicle()));
  }

  SECTION("stationary trajectory with zero noise has identical fingerprints") {
    MotionProfile still = MotionProfile::pedestrian();
    still.stop_prob = 1.0;
    fp::ChannelScene quiet = scene;
    quiet.noise_sigma_db = 0.0;
    auto t = generate_trajectory(g, still, 6, 4);
    t = attach_fingerprints(std::move(t), g, cb, quiet, 11);
    for (int l = 1; l < t.length(); ++l) REQUIRE(t.fingerprints[l] == t.fingerprints[0]);
  }

  SECTION("crossing a shadow boundary changes the fingerprint") {
    // straight synthetic path walking behind a building: ray sets before and
    // after the crossing differ, hence at least one row flips
    fp::ChannelScene quiet = scene;
    quiet.noise_sigma_db = 0.0;
    Trajectory t;
    t.t_obs = 1;
    bool had_los = false, lost_los = false;
    const auto walls = grid::extract_walls(g);
    for (double x = 20.0; x <= 44.0; x += 2.0) {
      const Position p{x, 52.5};
      if (!g.is_free(p)) continue;
      t.positions.push_back(p);
      const auto rays = fp::trace_rays(g, quiet.tx_position, p, 1, &walls);
      const bool los = !rays.empty() && rays.front().bounces == 0;
      had_los |= los;
      lost_los |= !los;
    }
    REQUIRE(t.positions.size() >= 4);
    REQUIRE(had_los);
    REQUIRE(lost_los);
    t = attach_fingerprints(std::move(t), g, cb, quiet, 2);
    bool any_change = false;
    for (std::size_t l = 1; l < t.fingerprints.size(); ++l)
      if (!(t.fingerprints[l] == t.fingerprints[l - 1])) any_change = true;
    REQUIRE(any_change);
  }
}

TEST_CASE("split_corpus slices exactly and reproducibly") {
  std::vector<std::uint64_t> ids(100);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = 1000 + i;

  SECTION("70/15/15 on 100 ids") {
    const auto s = split_corpus(ids, {0.70, 0.15, 0.15}, 9);
    REQUIRE(s.train.size() == 70);
    REQUIRE(s.val.size() == 15);
    REQUIRE(s.test.size() == 15);
    std::set<std::uint64_t> all;
    for (auto v : s.train) all.insert(v);
    for (auto v : s.val) all.insert(v);
    for (auto v : s.test) all.insert(v);
    REQUIRE(all.size() == 100);  // disjoint and covering
  }

  SECTION("(1,0,0) sends everything to train") {
    const auto s = split_corpus(ids, {1.0, 0.0, 0.0}, 9);
    REQUIRE(s.train.size() == 100);
    REQUIRE(s.val.empty());
    REQUIRE(s.test.empty());
  }

  SECTION("same seed twice gives an identical split") {
    const auto a = split_corpus(ids, {0.70, 0.15, 0.15}, 9);
    const auto b = split_corpus(ids, {0.70, 0.15, 0.15}, 9);
    REQUIRE(a.train == b.train);
    REQUIRE(a.val == b.val);
    REQUIRE(a.test == b.test);
  }

  SECTION("invalid inputs") {
    REQUIRE_THROWS_AS(split_corpus({}, {1, 0, 0}, 1), config_error);
    REQUIRE_THROWS_AS(split_corpus(ids, {0.5, 0.2, 0.2}, 1), config_error);
  }
}

TEST_CASE("corpus generation is worker-count independent and round-trips") {
  const auto g = desk_grid();
  const auto cb = fp::BeamCodebook::uniform(8);
  fp::ChannelScene scene;
  scene.tx_position = grid::nearest_free_position(g, {32, 32});
  scene.n_samples = 16;
  scene.sampling_freq_hz = 1.25e8;

  const auto c1 = generate_corpus(g, MotionProfile::vehicle(), 24, 8, 5, -1, &cb, &scene, 1);
  const auto c4 = generate_corpus(g, MotionProfile::vehicle(), 24, 8, 5, -1, &cb, &scene, 4);
  REQUIRE(c1.digest() == c4.digest());

  const std::string tpath = "test_corpus.bftr", fpath = "test_corpus.bffd";
  save_corpus(c1, tpath, fpath);
  const auto back = load_corpus(tpath, fpath);
  REQUIRE(back.digest() == c1.digest());
  REQUIRE(back.trajectories[3].fingerprints.size() == 8);
  std::remove(tpath.c_str());
  std::remove(fpath.c_str());
}
