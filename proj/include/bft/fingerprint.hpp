#pragma once
// Beamformed-fingerprint synthesis: a simplified image-method ray model over
// the occupancy grid, per-beam power delay profiles with log-normal noise,
// and threshold binarization into M x N_s bit matrices.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "bft/common.hpp"
#include "bft/geometry.hpp"
#include "bft/grid.hpp"

namespace bft::fp {

// Propagation constant used for delay binning and free-space loss.
inline constexpr double kSpeedOfLight = 3.0e8;
inline constexpr double kFloorDb = -300.0;  // empty-bin surrogate, below any threshold

struct BeamCodebook {
  int num_beams = 32;
  std::vector<double> beam_centers;  // radians, strictly increasing in [0, 2pi)
  double beamwidth_sigma = M_PI / 32.0;

  static BeamCodebook uniform(int m = 32, double sigma = -1.0) {
    if (m < 1) throw config_error("codebook needs at least one beam");
    BeamCodebook cb;
    cb.num_beams = m;
    cb.beam_centers.resize(m);
    for (int i = 0; i < m; ++i) cb.beam_centers[i] = 2.0 * M_PI * i / m;
    cb.beamwidth_sigma = sigma > 0 ? sigma : M_PI / m;
    return cb;
  }

  std::uint64_t digest() const {
    Digest d;
    d.update_u32(static_cast<std::uint32_t>(num_beams));
    d.update_f64(beamwidth_sigma);
    for (double c : beam_centers) d.update_f64(c);
    return d.value();
  }
};

struct ChannelScene {
  Position tx_position = {200.0, 200.0};
  double tx_power_dbm = 30.0;
  double tx_gain_dbi = 24.5;
  double rx_gain_dbi = 10.0;
  double sounding_amplitude_s = 1.0;
  double carrier_ghz = 28.0;
  double sampling_freq_hz = 2.0e7;
  int n_samples = 64;
  double noise_sigma_db = 6.0;
  double threshold_eta_db = -62.0;  // calibrated: median fingerprint density 1-5% ones
  double path_loss_exponent = 2.0;       // line of sight
  double path_loss_exponent_nlos = 2.9;  // after one bounce
  double reflection_loss_db = 6.0;

  double max_excess_delay_s() const { return n_samples / sampling_freq_hz; }

  void validate() const {
    if (sampling_freq_hz <= 0.0) throw config_error("scene: sampling frequency must be positive");
    if (n_samples < 1) throw config_error("scene: n_samples must be >= 1");
    if (noise_sigma_db < 0.0) throw config_error("scene: noise sigma must be >= 0");
  }

  std::uint64_t digest() const {
    Digest d;
    d.update_f64(tx_position.x);
    d.update_f64(tx_position.y);
    d.update_f64(tx_power_dbm);
    d.update_f64(tx_gain_dbi);
    d.update_f64(rx_gain_dbi);
    d.update_f64(sounding_amplitude_s);
    d.update_f64(carrier_ghz);
    d.update_f64(sampling_freq_hz);
    d.update_u32(static_cast<std::uint32_t>(n_samples));
    d.update_f64(noise_sigma_db);
    d.update_f64(threshold_eta_db);
    d.update_f64(path_loss_exponent);
    d.update_f64(path_loss_exponent_nlos);
    d.update_f64(reflection_loss_db);
    return d.value();
  }
};

struct PathRay {
  double length;           // meters
  double departure_angle;  // radians, at the transmitter
  int bounces;             // 0 = line of sight, 1 = single reflection
};

// Bit-packed M x N_s binary matrix plus its sampling location.
class Fingerprint {
 public:
  Fingerprint() = default;
  Fingerprint(int m, int ns, Position pos = {}, int time_index = 0)
      : m_(m), ns_(ns), pos_(pos), time_(time_index),
        words_((static_cast<std::size_t>(m) * ns + 63) / 64, 0) {}

  int beams() const { return m_; }
  int samples() const { return ns_; }
  Position position() const { return pos_; }
  int time_index() const { return time_; }

  bool get(int i, int j) const {
    const std::size_t k = static_cast<std::size_t>(i) * ns_ + j;
    return (words_[k / 64] >> (k % 64)) & 1u;
  }
  void set(int i, int j, bool v) {
    const std::size_t k = static_cast<std::size_t>(i) * ns_ + j;
    if (v)
      words_[k / 64] |= (1ULL << (k % 64));
    else
      words_[k / 64] &= ~(1ULL << (k % 64));
  }

  std::size_t ones() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(__builtin_popcountll(w));
    return n;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& words() { return words_; }

  // Row-major {0,1} doubles, for model input.
  void flatten_into(double* out) const {
    const std::size_t n = static_cast<std::size_t>(m_) * ns_;
    for (std::size_t k = 0; k < n; ++k) out[k] = (words_[k / 64] >> (k % 64)) & 1u ? 1.0 : 0.0;
  }

  bool operator==(const Fingerprint& o) const {
    return m_ == o.m_ && ns_ == o.ns_ && words_ == o.words_;
  }

 private:
  int m_ = 0, ns_ = 0;
  Position pos_;
  int time_ = 0;
  std::vector<std::uint64_t> words_;
};

struct DatasetRecord {
  Fingerprint fingerprint;
  Position position;
};

struct FingerprintDataset {
  std::vector<DatasetRecord> records;
  std::uint64_t grid_digest = 0;
  std::uint64_t scene_digest = 0;

  std::uint64_t digest() const {
    Digest d;
    d.update_u64(grid_digest);
    d.update_u64(scene_digest);
    d.update_u64(records.size());
    for (const auto& r : records) {
      d.update_f64(r.position.x);
      d.update_f64(r.position.y);
      d.update_u32(static_cast<std::uint32_t>(r.fingerprint.time_index()));
      for (auto w : r.fingerprint.words()) d.update_u64(w);
    }
    return d.value();
  }
};

// LOS ray plus one image-method reflection per visible wall segment.
// Rays are returned sorted by (bounces, length, angle) so downstream noise
// draws are order-stable.
inline std::vector<PathRay> trace_rays(const grid::OccupancyGrid& g, const Position& tx,
                                       const Position& rx, int max_bounces,
                                       const std::vector<grid::Wall>* walls_cache = nullptr) {
  if (max_bounces < 0 || max_bounces > 1)
    throw config_error("trace_rays: max_bounces must be 0 or 1");
  if (!g.is_free(tx)) throw config_error("trace_rays: tx position is not free");
  if (!g.is_free(rx)) throw config_error("trace_rays: rx position is not free");
  if (tx == rx) throw config_error("trace_rays: tx == rx is degenerate");

  std::vector<PathRay> rays;
  if (grid::collision_free_segment(g, tx, rx))
    rays.push_back({dist(tx, rx), angle_of(rx - tx), 0});

  if (max_bounces >= 1) {
    std::vector<grid::Wall> local;
    const std::vector<grid::Wall>& walls = walls_cache ? *walls_cache : (local = grid::extract_walls(g));
    const double off = g.cell_size() * 1e-3;
    for (const auto& w : walls) {
      // both endpoints must lie strictly on the wall's free side
      const double side_tx = dot(tx - w.a, w.n);
      const double side_rx = dot(rx - w.a, w.n);
      if (side_tx <= off || side_rx <= off) continue;
      // mirror tx across the wall line, intersect tx'->rx with the wall
      const Position tx_img = tx - w.n * (2.0 * side_tx);
      const Vec2 seg = rx - tx_img;
      const double denom = dot(seg, w.n);
      if (std::abs(denom) < 1e-12) continue;
      const double t = dot(w.a - tx_img, w.n) / denom;
      if (t <= 0.0 || t >= 1.0) continue;
      const Position q = tx_img + seg * t;
      const Vec2 along = w.b - w.a;
      const double u = dot(q - w.a, along) / along.norm2();
      if (u <= 0.0 || u >= 1.0) continue;
      const Position q_off = q + w.n * off;
      if (!grid::collision_free_segment(g, tx, q_off)) continue;
      if (!grid::collision_free_segment(g, q_off, rx)) continue;
      rays.push_back({dist(tx, q) + dist(q, rx), angle_of(q - tx), 1});
    }
  }

  std::sort(rays.begin(), rays.end(), [](const PathRay& a, const PathRay& b) {
    if (a.bounces != b.bounces) return a.bounces < b.bounces;
    if (a.length != b.length) return a.length < b.length;
    return a.departure_angle < b.departure_angle;
  });
  return rays;
}

inline double free_space_ref_loss_db(const ChannelScene& scene) {
  return 20.0 * std::log10(4.0 * M_PI * scene.carrier_ghz * 1e9 / kSpeedOfLight);
}

inline double path_loss_db(const ChannelScene& scene, double length_m, int bounces) {
  const double n = bounces == 0 ? scene.path_loss_exponent : scene.path_loss_exponent_nlos;
  return free_space_ref_loss_db(scene) + 10.0 * n * std::log10(std::max(length_m, 1.0));
}

inline int delay_bin(double length_m, double sampling_freq_hz) {
  return static_cast<int>(std::floor(length_m / kSpeedOfLight * sampling_freq_hz));
}

struct PdpDiagnostics {
  std::size_t dropped_rays = 0;  // delay beyond the max excess delay window
};

// Per-beam PDP in dB. Each ray deposits
//   tx_power + tx_gain * gaussian(d_theta) + rx_gain + 20 log10(s)
//   - path_loss - bounces * reflection_loss + Normal(0, noise_sigma_db),
// accumulated linearly per delay bin; empty bins sit at the -300 dB floor.
inline std::vector<double> synth_pdp(const std::vector<PathRay>& rays, int beam_index,
                                     const ChannelScene& scene, const BeamCodebook& codebook,
                                     std::uint64_t rng_seed, PdpDiagnostics* diag = nullptr) {
  if (beam_index < 0 || beam_index >= codebook.num_beams)
    throw config_error("synth_pdp: beam index out of range");
  scene.validate();
  std::vector<double> lin(static_cast<std::size_t>(scene.n_samples), 0.0);
  DetRng rng(hash_mix(rng_seed, 0x706470ULL, static_cast<std::uint64_t>(beam_index)));
  const double center = codebook.beam_centers[beam_index];
  const double sig2 = 2.0 * codebook.beamwidth_sigma * codebook.beamwidth_sigma;
  for (const auto& ray : rays) {
    const double noise = scene.noise_sigma_db > 0.0 ? rng.normal(0.0, scene.noise_sigma_db) : 0.0;
    const double dth = wrap_angle(ray.departure_angle - center);
    const double p_db = scene.tx_power_dbm + scene.tx_gain_dbi * std::exp(-dth * dth / sig2) +
                        scene.rx_gain_dbi + 20.0 * std::log10(scene.sounding_amplitude_s) -
                        path_loss_db(scene, ray.length, ray.bounces) -
                        ray.bounces * scene.reflection_loss_db + noise;
    const int j = delay_bin(ray.length, scene.sampling_freq_hz);
    if (j < 0 || j >= scene.n_samples) {
      if (diag) ++diag->dropped_rays;
      continue;
    }
    lin[j] += std::pow(10.0, p_db / 10.0);
  }
  std::vector<double> pdp(lin.size(), kFloorDb);
  for (std::size_t j = 0; j < lin.size(); ++j)
    if (lin[j] > 0.0) pdp[j] = 10.0 * std::log10(lin[j]);
  return pdp;
}

// Indicator thresholding; the boundary P == eta maps to 1.
inline std::vector<std::uint8_t> binarize(const std::vector<double>& pdp, double eta_db) {
  std::vector<std::uint8_t> out(pdp.size());
  for (std::size_t j = 0; j < pdp.size(); ++j) out[j] = pdp[j] >= eta_db ? 1 : 0;
  return out;
}

inline Fingerprint build_fingerprint(const grid::OccupancyGrid& g, const Position& tx,
                                     const Position& rx, const BeamCodebook& codebook,
                                     const ChannelScene& scene, std::uint64_t seed,
                                     int time_index = 0,
                                     const std::vector<grid::Wall>* walls_cache = nullptr,
                                     PdpDiagnostics* diag = nullptr) {
  const auto rays = trace_rays(g, tx, rx, 1, walls_cache);
  Fingerprint f(codebook.num_beams, scene.n_samples, rx, time_index);
  const std::uint64_t base =
      hash_mix(seed, bits_of(rx.x), bits_of(rx.y), static_cast<std::uint64_t>(time_index));
  for (int i = 0; i < codebook.num_beams; ++i) {
    const auto pdp = synth_pdp(rays, i, scene, codebook, base, diag);
    const auto row = binarize(pdp, scene.threshold_eta_db);
    for (int j = 0; j < scene.n_samples; ++j)
      if (row[j]) f.set(i, j, true);
  }
  return f;
}

// One record per free cell at the given stride. Per-record seeds derive from
// the cell index, so records are identical no matter the generation order or
// worker count.
inline FingerprintDataset build_dataset(const grid::OccupancyGrid& g, const BeamCodebook& codebook,
                                        const ChannelScene& scene, int stride, std::uint64_t seed,
                                        unsigned workers = 1) {
  if (stride < 1) throw config_error("build_dataset: stride must be >= 1");
  const auto walls = grid::extract_walls(g);
  struct Site {
    Position pos;
    std::uint64_t cell_index;
  };
  std::vector<Site> sites;
  for (int iy = 0; iy < g.height_cells(); iy += stride)
    for (int ix = 0; ix < g.width_cells(); ix += stride) {
      if (g.blocked_cell(ix, iy)) continue;
      const Position p = g.cell_center(ix, iy);
      if (p == scene.tx_position) continue;  // degenerate tx == rx site
      sites.push_back({p, static_cast<std::uint64_t>(iy) * g.width_cells() + ix});
    }
  FingerprintDataset ds;
  ds.grid_digest = g.digest();
  ds.scene_digest = scene.digest();
  ds.records.resize(sites.size());
  parallel_for(sites.size(), workers, [&](std::size_t k) {
    const std::uint64_t rec_seed = hash_mix(seed, 0x647374ULL, sites[k].cell_index);
    ds.records[k] = {build_fingerprint(g, scene.tx_position, sites[k].pos, codebook, scene,
                                       rec_seed, 0, &walls),
                     sites[k].pos};
  });
  return ds;
}

// ---- BFFD file format ----
// magic "BFFD", u32 version, u32 M, u32 N_s, u64 record count, u64 grid digest,
// u64 scene digest; records: f64 x, f64 y, i32 time_index, bit-packed M*N_s.

inline void save_dataset(const FingerprintDataset& ds, int m, int ns, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for write: " + path);
  const char magic[4] = {'B', 'F', 'F', 'D'};
  out.write(magic, 4);
  const std::uint32_t version = 1, um = m, uns = ns;
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&um), 4);
  out.write(reinterpret_cast<const char*>(&uns), 4);
  const std::uint64_t count = ds.records.size();
  out.write(reinterpret_cast<const char*>(&count), 8);
  out.write(reinterpret_cast<const char*>(&ds.grid_digest), 8);
  out.write(reinterpret_cast<const char*>(&ds.scene_digest), 8);
  const std::size_t bits = static_cast<std::size_t>(m) * ns;
  const std::size_t nbytes = (bits + 7) / 8;
  for (const auto& r : ds.records) {
    out.write(reinterpret_cast<const char*>(&r.position.x), 8);
    out.write(reinterpret_cast<const char*>(&r.position.y), 8);
    const std::int32_t t = r.fingerprint.time_index();
    out.write(reinterpret_cast<const char*>(&t), 4);
    std::vector<std::uint8_t> packed(nbytes, 0);
    for (std::size_t k = 0; k < bits; ++k)
      if ((r.fingerprint.words()[k / 64] >> (k % 64)) & 1u)
        packed[k / 8] |= static_cast<std::uint8_t>(1u << (k % 8));
    out.write(reinterpret_cast<const char*>(packed.data()), static_cast<std::streamsize>(nbytes));
  }
  if (!out) throw io_error("write failed: " + path);
}

inline FingerprintDataset load_dataset(const std::string& path, int* m_out = nullptr,
                                       int* ns_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open for read: " + path);
  char magic[4];
  grid::detail::read_bytes(in, magic, 4);
  if (std::string(magic, 4) != "BFFD") throw io_error("bad magic (expected BFFD): " + path);
  std::uint32_t version = 0, m = 0, ns = 0;
  grid::detail::read_bytes(in, &version, 4);
  if (version != 1) throw io_error("unsupported BFFD version");
  grid::detail::read_bytes(in, &m, 4);
  grid::detail::read_bytes(in, &ns, 4);
  std::uint64_t count = 0;
  grid::detail::read_bytes(in, &count, 8);
  FingerprintDataset ds;
  grid::detail::read_bytes(in, &ds.grid_digest, 8);
  grid::detail::read_bytes(in, &ds.scene_digest, 8);
  const std::size_t bits = static_cast<std::size_t>(m) * ns;
  const std::size_t nbytes = (bits + 7) / 8;
  ds.records.resize(count);
  std::vector<std::uint8_t> packed(nbytes);
  for (auto& r : ds.records) {
    Position p;
    std::int32_t t = 0;
    grid::detail::read_bytes(in, &p.x, 8);
    grid::detail::read_bytes(in, &p.y, 8);
    grid::detail::read_bytes(in, &t, 4);
    grid::detail::read_bytes(in, packed.data(), nbytes);
    Fingerprint f(static_cast<int>(m), static_cast<int>(ns), p, t);
    for (std::size_t k = 0; k < bits; ++k)
      if (packed[k / 8] & (1u << (k % 8)))
        f.set(static_cast<int>(k / ns), static_cast<int>(k % ns), true);
    r = {std::move(f), p};
  }
  if (m_out) *m_out = static_cast<int>(m);
  if (ns_out) *ns_out = static_cast<int>(ns);
  return ds;
}

}  // namespace bft::fp
