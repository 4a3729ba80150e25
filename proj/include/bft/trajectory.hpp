#pragma once
// Seeded pedestrian/vehicle/hybrid trajectory generation over the free grid,
// per-step fingerprint attachment, and disjoint corpus splits.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "bft/common.hpp"
#include "bft/fingerprint.hpp"
#include "bft/geometry.hpp"
#include "bft/grid.hpp"

namespace bft::traj {

enum class MotionKind : std::uint8_t { pedestrian = 0, vehicle = 1, hybrid = 2 };

inline const char* kind_name(MotionKind k) {
  switch (k) {
    case MotionKind::pedestrian: return "pedestrian";
    case MotionKind::vehicle: return "vehicle";
    case MotionKind::hybrid: return "hybrid";
  }
  return "?";
}

struct MotionProfile {
  MotionKind kind = MotionKind::pedestrian;
  double avg_speed = 5.0 / 3.6;  // m/s
  double speed_sigma = 0.5 / 3.6;
  double turn_prob = 0.3;   // per step
  double stop_prob = 0.1;   // per step
  double max_turn = M_PI / 2;  // radians per step
  double sample_rate_hz = 1.0;

  static MotionProfile pedestrian() { return {}; }

  static MotionProfile vehicle() {
    MotionProfile p;
    p.kind = MotionKind::vehicle;
    p.avg_speed = 30.0 / 3.6;
    p.speed_sigma = 3.0 / 3.6;  // 10% of mean
    p.turn_prob = 0.1;
    p.stop_prob = 0.0;
    p.max_turn = M_PI / 6;
    return p;
  }

  // kinematics halfway between pedestrian and vehicle
  static MotionProfile hybrid() {
    const MotionProfile a = pedestrian(), b = vehicle();
    MotionProfile p;
    p.kind = MotionKind::hybrid;
    p.avg_speed = 0.5 * (a.avg_speed + b.avg_speed);
    p.speed_sigma = 0.5 * (a.speed_sigma + b.speed_sigma);
    p.turn_prob = 0.5 * (a.turn_prob + b.turn_prob);
    p.stop_prob = 0.5 * (a.stop_prob + b.stop_prob);
    p.max_turn = 0.5 * (a.max_turn + b.max_turn);
    return p;
  }

  static MotionProfile by_kind(MotionKind k) {
    switch (k) {
      case MotionKind::vehicle: return vehicle();
      case MotionKind::hybrid: return hybrid();
      default: return pedestrian();
    }
  }

  double max_step_m() const { return (avg_speed + 3.0 * speed_sigma) / sample_rate_hz; }

  void validate() const {
    if (avg_speed <= 0.0) throw config_error("motion profile: avg_speed must be positive");
    if (turn_prob < 0.0 || turn_prob > 1.0 || stop_prob < 0.0 || stop_prob > 1.0)
      throw config_error("motion profile: probabilities must lie in [0,1]");
    if (sample_rate_hz <= 0.0) throw config_error("motion profile: sample rate must be positive");
  }

  std::uint64_t digest() const {
    Digest d;
    d.update_u32(static_cast<std::uint32_t>(kind));
    d.update_f64(avg_speed);
    d.update_f64(speed_sigma);
    d.update_f64(turn_prob);
    d.update_f64(stop_prob);
    d.update_f64(max_turn);
    d.update_f64(sample_rate_hz);
    return d.value();
  }
};

struct Trajectory {
  std::uint64_t id = 0;
  std::vector<Position> positions;  // y^(1) .. y^(L)
  int t_obs = 0;
  std::vector<fp::Fingerprint> fingerprints;  // empty until attached

  int length() const { return static_cast<int>(positions.size()); }
  int horizon() const { return length() - t_obs; }
  bool has_fingerprints() const { return !fingerprints.empty(); }
};

inline int default_t_obs(int length) { return (2 * length + 2) / 3; }  // ceil(2L/3)

inline std::uint64_t trajectory_id(std::uint64_t seed, const MotionProfile& profile, int length,
                                   std::uint64_t grid_digest) {
  return hash_mix(seed, profile.digest(), static_cast<std::uint64_t>(length), grid_digest);
}

// Iterative construction: hold with stop_prob, perturb heading with
// turn_prob, step at ~N(avg_speed, sigma) clamped into [0, avg + 3 sigma].
// A colliding step re-samples the heading up to 16 times, then tries the
// reflected heading, then fails so the caller can re-seed.
inline Trajectory generate_trajectory(const grid::OccupancyGrid& g, const MotionProfile& profile,
                                      int length, std::uint64_t seed, int t_obs = -1) {
  profile.validate();
  if (length < 2) throw config_error("generate_trajectory: length must be >= 2");
  const auto cells = g.free_cells();
  if (cells.empty()) throw config_error("generate_trajectory: grid has no free cell");

  DetRng rng(hash_mix(seed, 0x74726aULL));
  Trajectory t;
  t.id = trajectory_id(seed, profile, length, g.digest());
  t.t_obs = t_obs > 0 ? t_obs : default_t_obs(length);
  if (t.t_obs < 1 || t.t_obs >= length)
    throw config_error("generate_trajectory: need 1 <= T_obs < L");

  const auto [ix, iy] = cells[rng.uniform_below(cells.size())];
  Position cur = g.cell_center(ix, iy);
  cur.x += rng.uniform(-0.45, 0.45) * g.cell_size();
  cur.y += rng.uniform(-0.45, 0.45) * g.cell_size();
  t.positions.push_back(cur);

  double heading = rng.uniform(0.0, 2.0 * M_PI);
  for (int l = 1; l < length; ++l) {
    if (profile.stop_prob > 0.0 && rng.uniform01() < profile.stop_prob) {
      t.positions.push_back(cur);
      continue;
    }
    if (rng.uniform01() < profile.turn_prob)
      heading += rng.uniform(-profile.max_turn, profile.max_turn);
    const double speed =
        std::clamp(rng.normal(profile.avg_speed, profile.speed_sigma), 0.0,
                   profile.avg_speed + 3.0 * profile.speed_sigma);
    const double step = speed / profile.sample_rate_hz;

    Position next = cur + unit_from_angle(heading) * step;
    bool ok = grid::collision_free_segment(g, cur, next);
    for (int attempt = 0; !ok && attempt < 16; ++attempt) {
      heading = rng.uniform(0.0, 2.0 * M_PI);
      next = cur + unit_from_angle(heading) * step;
      ok = grid::collision_free_segment(g, cur, next);
    }
    if (!ok) {
      heading += M_PI;  // reflect
      next = cur + unit_from_angle(heading) * step;
      ok = grid::collision_free_segment(g, cur, next);
    }
    if (!ok)
      throw budget_error("generate_trajectory: no feasible step at l=" + std::to_string(l));
    cur = next;
    t.positions.push_back(cur);
  }
  return t;
}

inline Trajectory attach_fingerprints(Trajectory t, const grid::OccupancyGrid& g,
                                      const fp::BeamCodebook& codebook,
                                      const fp::ChannelScene& scene, std::uint64_t seed,
                                      const std::vector<grid::Wall>* walls_cache = nullptr) {
  std::vector<grid::Wall> local;
  const auto& walls = walls_cache ? *walls_cache : (local = grid::extract_walls(g));
  t.fingerprints.clear();
  t.fingerprints.reserve(t.positions.size());
  for (int l = 0; l < t.length(); ++l) {
    t.fingerprints.push_back(fp::build_fingerprint(
        g, scene.tx_position, t.positions[l], codebook, scene,
        hash_mix(seed, 0x667074ULL, static_cast<std::uint64_t>(l)), l, &walls));
  }
  return t;
}

// Independent post-hoc check used by tests and corpus generation.
inline void validate_trajectory(const grid::OccupancyGrid& g, const Trajectory& t,
                                const MotionProfile& profile) {
  if (t.t_obs < 1 || t.t_obs >= t.length())
    throw numeric_error("trajectory: T_obs out of range");
  const double bound = profile.max_step_m() + 1e-9;
  for (int l = 0; l < t.length(); ++l) {
    if (!g.is_free(t.positions[l])) throw numeric_error("trajectory: position not free");
    if (l > 0) {
      if (dist(t.positions[l - 1], t.positions[l]) > bound)
        throw numeric_error("trajectory: step exceeds speed bound");
      if (!grid::collision_free_segment(g, t.positions[l - 1], t.positions[l]))
        throw numeric_error("trajectory: segment collides");
    }
  }
  if (t.has_fingerprints() && t.fingerprints.size() != t.positions.size())
    throw numeric_error("trajectory: fingerprint count mismatch");
}

struct DatasetSplit {
  std::vector<std::uint64_t> train, val, test;
};

// Seeded Fisher-Yates shuffle, then contiguous slices.
inline DatasetSplit split_corpus(const std::vector<std::uint64_t>& ids,
                                 const std::array<double, 3>& fractions, std::uint64_t seed) {
  if (ids.empty()) throw config_error("split_corpus: empty corpus");
  const double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9) throw config_error("split_corpus: fractions must sum to 1");
  for (double f : fractions)
    if (f < 0.0) throw config_error("split_corpus: fractions must be non-negative");

  std::vector<std::uint64_t> shuffled = ids;
  DetRng rng(hash_mix(seed, 0x73706cULL));
  for (std::size_t i = shuffled.size(); i > 1; --i)
    std::swap(shuffled[i - 1], shuffled[rng.uniform_below(i)]);

  const std::size_t n = shuffled.size();
  std::size_t n_train = static_cast<std::size_t>(std::llround(fractions[0] * n));
  std::size_t n_val = static_cast<std::size_t>(std::llround(fractions[1] * n));
  n_train = std::min(n_train, n);
  n_val = std::min(n_val, n - n_train);

  DatasetSplit s;
  s.train.assign(shuffled.begin(), shuffled.begin() + n_train);
  s.val.assign(shuffled.begin() + n_train, shuffled.begin() + n_train + n_val);
  s.test.assign(shuffled.begin() + n_train + n_val, shuffled.end());
  return s;
}

// Corpus generation: per-trajectory derived seeds, automatic re-seed on the
// rare dead-end failure, optional fingerprint attachment, parallel over
// trajectories with order-independent results.
struct Corpus {
  std::vector<Trajectory> trajectories;
  std::uint64_t grid_digest = 0;
  std::uint64_t seed = 0;

  std::vector<std::uint64_t> ids() const {
    std::vector<std::uint64_t> out;
    out.reserve(trajectories.size());
    for (const auto& t : trajectories) out.push_back(t.id);
    return out;
  }

  std::uint64_t digest() const {
    Digest d;
    d.update_u64(grid_digest);
    d.update_u64(seed);
    d.update_u64(trajectories.size());
    for (const auto& t : trajectories) {
      d.update_u64(t.id);
      d.update_u32(static_cast<std::uint32_t>(t.t_obs));
      for (const auto& p : t.positions) {
        d.update_f64(p.x);
        d.update_f64(p.y);
      }
      for (const auto& f : t.fingerprints)
        for (auto w : f.words()) d.update_u64(w);
    }
    return d.value();
  }
};

inline Corpus generate_corpus(const grid::OccupancyGrid& g, const MotionProfile& profile,
                              int count, int length, std::uint64_t seed, int t_obs = -1,
                              const fp::BeamCodebook* codebook = nullptr,
                              const fp::ChannelScene* scene = nullptr, unsigned workers = 1) {
  Corpus c;
  c.grid_digest = g.digest();
  c.seed = seed;
  c.trajectories.resize(count);
  const auto walls = (codebook && scene) ? grid::extract_walls(g) : std::vector<grid::Wall>{};
  parallel_for(static_cast<std::size_t>(count), workers, [&](std::size_t k) {
    std::uint64_t s = hash_mix(seed, static_cast<std::uint64_t>(k));
    for (int tries = 0;; ++tries) {
      try {
        Trajectory t = generate_trajectory(g, profile, length, s, t_obs);
        if (codebook && scene)
          t = attach_fingerprints(std::move(t), g, *codebook, *scene,
                                  hash_mix(seed, 0x617474ULL, static_cast<std::uint64_t>(k)),
                                  &walls);
        c.trajectories[k] = std::move(t);
        return;
      } catch (const budget_error&) {
        if (tries >= 8) throw;
        s = hash_mix(s, 0x7265747279ULL);
      }
    }
  });
  return c;
}

// ---- BFTR file format ----
// magic "BFTR", u32 version, u64 count, u64 corpus seed, u64 grid digest;
// per trajectory: u64 id, u32 L, u32 T_obs, L * (f64 x, f64 y),
// i64 fingerprint record offset into the companion BFFD file (-1 if none).

inline void save_corpus(const Corpus& c, const std::string& path,
                        const std::string& fingerprint_path = "") {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for write: " + path);
  const char magic[4] = {'B', 'F', 'T', 'R'};
  out.write(magic, 4);
  const std::uint32_t version = 1;
  out.write(reinterpret_cast<const char*>(&version), 4);
  const std::uint64_t count = c.trajectories.size();
  out.write(reinterpret_cast<const char*>(&count), 8);
  out.write(reinterpret_cast<const char*>(&c.seed), 8);
  out.write(reinterpret_cast<const char*>(&c.grid_digest), 8);
  std::int64_t fp_offset = 0;
  for (const auto& t : c.trajectories) {
    out.write(reinterpret_cast<const char*>(&t.id), 8);
    const std::uint32_t L = t.positions.size(), tobs = t.t_obs;
    out.write(reinterpret_cast<const char*>(&L), 4);
    out.write(reinterpret_cast<const char*>(&tobs), 4);
    for (const auto& p : t.positions) {
      out.write(reinterpret_cast<const char*>(&p.x), 8);
      out.write(reinterpret_cast<const char*>(&p.y), 8);
    }
    const std::int64_t off = t.has_fingerprints() ? fp_offset : -1;
    out.write(reinterpret_cast<const char*>(&off), 8);
    if (t.has_fingerprints()) fp_offset += t.length();
  }
  if (!out) throw io_error("write failed: " + path);

  if (!fingerprint_path.empty()) {
    fp::FingerprintDataset ds;
    ds.grid_digest = c.grid_digest;
    int m = 0, ns = 0;
    for (const auto& t : c.trajectories)
      for (const auto& f : t.fingerprints) {
        ds.records.push_back({f, f.position()});
        m = f.beams();
        ns = f.samples();
      }
    fp::save_dataset(ds, m, ns, fingerprint_path);
  }
}

inline Corpus load_corpus(const std::string& path, const std::string& fingerprint_path = "") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open for read: " + path);
  char magic[4];
  grid::detail::read_bytes(in, magic, 4);
  if (std::string(magic, 4) != "BFTR") throw io_error("bad magic (expected BFTR): " + path);
  std::uint32_t version = 0;
  grid::detail::read_bytes(in, &version, 4);
  if (version != 1) throw io_error("unsupported BFTR version");
  std::uint64_t count = 0;
  grid::detail::read_bytes(in, &count, 8);
  Corpus c;
  grid::detail::read_bytes(in, &c.seed, 8);
  grid::detail::read_bytes(in, &c.grid_digest, 8);
  fp::FingerprintDataset ds;
  if (!fingerprint_path.empty()) ds = fp::load_dataset(fingerprint_path);
  c.trajectories.resize(count);
  for (auto& t : c.trajectories) {
    grid::detail::read_bytes(in, &t.id, 8);
    std::uint32_t L = 0, tobs = 0;
    grid::detail::read_bytes(in, &L, 4);
    grid::detail::read_bytes(in, &tobs, 4);
    t.t_obs = static_cast<int>(tobs);
    t.positions.resize(L);
    for (auto& p : t.positions) {
      grid::detail::read_bytes(in, &p.x, 8);
      grid::detail::read_bytes(in, &p.y, 8);
    }
    std::int64_t off = -1;
    grid::detail::read_bytes(in, &off, 8);
    if (off >= 0 && !fingerprint_path.empty()) {
      if (static_cast<std::size_t>(off) + L > ds.records.size())
        throw io_error("BFTR fingerprint offset out of range");
      for (std::uint32_t l = 0; l < L; ++l)
        t.fingerprints.push_back(ds.records[off + l].fingerprint);
    }
  }
  return c;
}

}  // namespace bft::traj
