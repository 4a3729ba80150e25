#pragma once
// Procedural 2D urban occupancy grid: generation, point/segment collision
// queries, wall extraction for the ray model, and the BFGW file format.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <queue>
#include <string>
#include <vector>

#include "bft/common.hpp"
#include "bft/geometry.hpp"
#include "bft/svg.hpp"

namespace bft::grid {

struct BlockSpec {
  int block_w = 8;
  int block_h = 8;
  int street_w = 3;
};

struct CellRect {
  int x0, y0, w, h;  // cell units
  bool contains_cell(int ix, int iy) const {
    return ix >= x0 && ix < x0 + w && iy >= y0 && iy < y0 + h;
  }
};

class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width_cells, int height_cells, double cell_size, std::uint64_t seed)
      : w_(width_cells), h_(height_cells), cell_(cell_size), seed_(seed),
        cells_(static_cast<std::size_t>(width_cells) * height_cells, 0) {
    if (width_cells < 3 || height_cells < 3 || cell_size <= 0.0)
      throw config_error("grid dimensions must be >= 3 cells with positive cell size");
  }

  int width_cells() const { return w_; }
  int height_cells() const { return h_; }
  double cell_size() const { return cell_; }
  std::uint64_t seed() const { return seed_; }
  double width_m() const { return w_ * cell_; }
  double height_m() const { return h_ * cell_; }

  bool in_bounds_cell(int ix, int iy) const { return ix >= 0 && ix < w_ && iy >= 0 && iy < h_; }
  bool blocked_cell(int ix, int iy) const { return cells_[idx(ix, iy)] != 0; }
  void set_blocked(int ix, int iy, bool b) { cells_[idx(ix, iy)] = b ? 1 : 0; }

  // Out-of-bounds positions are not free.
  bool is_free(const Position& p) const {
    if (!p.finite()) return false;
    if (p.x < 0.0 || p.y < 0.0 || p.x >= width_m() || p.y >= height_m()) return false;
    const int ix = static_cast<int>(p.x / cell_);
    const int iy = static_cast<int>(p.y / cell_);
    if (!in_bounds_cell(ix, iy)) return false;
    return !blocked_cell(ix, iy);
  }

  Position cell_center(int ix, int iy) const {
    return {(ix + 0.5) * cell_, (iy + 0.5) * cell_};
  }

  std::size_t free_cell_count() const {
    std::size_t n = 0;
    for (auto c : cells_) n += (c == 0);
    return n;
  }

  std::vector<std::pair<int, int>> free_cells() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(free_cell_count());
    for (int iy = 0; iy < h_; ++iy)
      for (int ix = 0; ix < w_; ++ix)
        if (!blocked_cell(ix, iy)) out.emplace_back(ix, iy);
    return out;
  }

  const std::vector<std::uint8_t>& raw_cells() const { return cells_; }

  std::uint64_t digest() const {
    Digest d;
    d.update_u32(static_cast<std::uint32_t>(w_));
    d.update_u32(static_cast<std::uint32_t>(h_));
    d.update_f64(cell_);
    d.update_u64(seed_);
    d.update(cells_.data(), cells_.size());
    return d.value();
  }

 private:
  std::size_t idx(int ix, int iy) const { return static_cast<std::size_t>(iy) * w_ + ix; }

  int w_ = 0, h_ = 0;
  double cell_ = 1.0;
  std::uint64_t seed_ = 0;
  std::vector<std::uint8_t> cells_;
};

// Supersampled point checks at step cell_size/2, endpoints included. The
// sample set is symmetric in (a, b), so the check is direction-independent.
inline bool collision_free_segment(const OccupancyGrid& g, const Position& a, const Position& b) {
  if (!a.finite() || !b.finite()) return false;
  const double len = dist(a, b);
  if (len == 0.0) return g.is_free(a);
  const double step = g.cell_size() * 0.5;
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int i = 0; i <= n; ++i) {
    if (!g.is_free(lerp(a, b, static_cast<double>(i) / n))) return false;
  }
  return true;
}

// 4-connected flood fill over free cells starting anywhere; true iff the
// free region is one connected component.
inline bool free_region_connected(const OccupancyGrid& g) {
  const int w = g.width_cells(), h = g.height_cells();
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(w) * h, 0);
  int sx = -1, sy = -1;
  for (int iy = 0; iy < h && sx < 0; ++iy)
    for (int ix = 0; ix < w; ++ix)
      if (!g.blocked_cell(ix, iy)) {
        sx = ix;
        sy = iy;
        break;
      }
  if (sx < 0) return false;
  std::queue<std::pair<int, int>> q;
  q.emplace(sx, sy);
  seen[static_cast<std::size_t>(sy) * w + sx] = 1;
  std::size_t reached = 0;
  const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
  while (!q.empty()) {
    auto [ix, iy] = q.front();
    q.pop();
    ++reached;
    for (int k = 0; k < 4; ++k) {
      const int nx = ix + dx[k], ny = iy + dy[k];
      if (!g.in_bounds_cell(nx, ny) || g.blocked_cell(nx, ny)) continue;
      auto& s = seen[static_cast<std::size_t>(ny) * w + nx];
      if (!s) {
        s = 1;
        q.emplace(nx, ny);
      }
    }
  }
  return reached == g.free_cell_count();
}

// Manhattan-like block/street lattice with per-block seeded jitter. Streets
// are carved after block placement; any free pocket sealed off by a block
// against the boundary ring is filled in, so the free region stays one
// 4-connected component.
inline OccupancyGrid generate_city_grid(std::uint64_t seed, int width_cells, int height_cells,
                                        double cell_size, const BlockSpec& spec,
                                        std::vector<CellRect>* placed_blocks = nullptr) {
  if (width_cells < 3 || height_cells < 3)
    throw config_error("generate_city_grid: dimensions must be >= 3 cells");
  if (spec.street_w < 1 || spec.block_w < 1 || spec.block_h < 1)
    throw config_error("generate_city_grid: street_w and block dims must be >= 1");

  OccupancyGrid g(width_cells, height_cells, cell_size, seed);

  // boundary ring
  for (int ix = 0; ix < width_cells; ++ix) {
    g.set_blocked(ix, 0, true);
    g.set_blocked(ix, height_cells - 1, true);
  }
  for (int iy = 0; iy < height_cells; ++iy) {
    g.set_blocked(0, iy, true);
    g.set_blocked(width_cells - 1, iy, true);
  }

  const int period_x = spec.block_w + spec.street_w;
  const int period_y = spec.block_h + spec.street_w;
  std::vector<CellRect> blocks;

  for (int by = 0, y0 = 1 + spec.street_w; y0 < height_cells - 1; ++by, y0 += period_y) {
    for (int bx = 0, x0 = 1 + spec.street_w; x0 < width_cells - 1; ++bx, x0 += period_x) {
      const int bw = std::min(spec.block_w, width_cells - 1 - x0);
      const int bh = std::min(spec.block_h, height_cells - 1 - y0);
      if (bw < 1 || bh < 1) continue;
      DetRng rng(hash_mix(seed, 0x626c6bULL, static_cast<std::uint64_t>(bx),
                          static_cast<std::uint64_t>(by)));
      const int dw = static_cast<int>(rng.uniform_below(std::min(3, bw)));
      const int dh = static_cast<int>(rng.uniform_below(std::min(3, bh)));
      const int ox = dw > 0 ? static_cast<int>(rng.uniform_below(dw + 1)) : 0;
      const int oy = dh > 0 ? static_cast<int>(rng.uniform_below(dh + 1)) : 0;
      CellRect r{x0 + ox, y0 + oy, bw - dw, bh - dh};
      if (r.w < 1 || r.h < 1) continue;
      for (int iy = r.y0; iy < r.y0 + r.h; ++iy)
        for (int ix = r.x0; ix < r.x0 + r.w; ++ix) g.set_blocked(ix, iy, true);
      blocks.push_back(r);
    }
  }

  // carve street lanes (idempotent when blocks stayed inside their slots)
  for (int x0 = 1; x0 < width_cells - 1; x0 += period_x)
    for (int ix = x0; ix < std::min(x0 + spec.street_w, width_cells - 1); ++ix)
      for (int iy = 1; iy < height_cells - 1; ++iy) g.set_blocked(ix, iy, false);
  for (int y0 = 1; y0 < height_cells - 1; y0 += period_y)
    for (int iy = y0; iy < std::min(y0 + spec.street_w, height_cells - 1); ++iy)
      for (int ix = 1; ix < width_cells - 1; ++ix) g.set_blocked(ix, iy, false);

  // fill free pockets not reachable from the street at (1,1)
  {
    const int w = width_cells, h = height_cells;
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(w) * h, 0);
    std::queue<std::pair<int, int>> q;
    q.emplace(1, 1);
    seen[static_cast<std::size_t>(w) + 1] = 1;
    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    while (!q.empty()) {
      auto [ix, iy] = q.front();
      q.pop();
      for (int k = 0; k < 4; ++k) {
        const int nx = ix + dx[k], ny = iy + dy[k];
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        if (g.blocked_cell(nx, ny)) continue;
        auto& s = seen[static_cast<std::size_t>(ny) * w + nx];
        if (!s) {
          s = 1;
          q.emplace(nx, ny);
        }
      }
    }
    for (int iy = 0; iy < h; ++iy)
      for (int ix = 0; ix < w; ++ix)
        if (!g.blocked_cell(ix, iy) && !seen[static_cast<std::size_t>(iy) * w + ix])
          g.set_blocked(ix, iy, true);
  }

  if (placed_blocks) *placed_blocks = std::move(blocks);
  return g;
}

// Nearest free cell center to p, by BFS ring distance (deterministic).
inline Position nearest_free_position(const OccupancyGrid& g, const Position& p) {
  int ix = std::clamp(static_cast<int>(p.x / g.cell_size()), 0, g.width_cells() - 1);
  int iy = std::clamp(static_cast<int>(p.y / g.cell_size()), 0, g.height_cells() - 1);
  if (!g.blocked_cell(ix, iy)) return g.cell_center(ix, iy);
  for (int r = 1; r < std::max(g.width_cells(), g.height_cells()); ++r) {
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
        const int nx = ix + dx, ny = iy + dy;
        if (g.in_bounds_cell(nx, ny) && !g.blocked_cell(nx, ny)) return g.cell_center(nx, ny);
      }
  }
  throw config_error("nearest_free_position: grid has no free cell");
}

// Axis-aligned wall face between a free and a blocked cell; n points into
// the free side.
struct Wall {
  Vec2 a, b;
  Vec2 n;
};

inline std::vector<Wall> extract_walls(const OccupancyGrid& g) {
  std::vector<Wall> walls;
  const int w = g.width_cells(), h = g.height_cells();
  const double c = g.cell_size();
  // vertical faces at x = ix*c between cells (ix-1, iy) and (ix, iy)
  for (int ix = 1; ix < w; ++ix) {
    int run_start = -1;
    int run_dir = 0;  // +1: free on +x side, -1: free on -x side
    auto flush = [&](int iy_end) {
      if (run_start < 0) return;
      walls.push_back({{ix * c, run_start * c},
                       {ix * c, iy_end * c},
                       {run_dir > 0 ? 1.0 : -1.0, 0.0}});
      run_start = -1;
    };
    for (int iy = 0; iy < h; ++iy) {
      const bool bl = g.blocked_cell(ix - 1, iy), br = g.blocked_cell(ix, iy);
      int dir = 0;
      if (bl && !br) dir = 1;
      else if (!bl && br) dir = -1;
      if (dir != run_dir) {
        flush(iy);
        run_dir = dir;
        if (dir != 0) run_start = iy;
      }
    }
    flush(h);
  }
  // horizontal faces at y = iy*c between cells (ix, iy-1) and (ix, iy)
  for (int iy = 1; iy < h; ++iy) {
    int run_start = -1;
    int run_dir = 0;  // +1: free on +y side, -1: free on -y side
    auto flush = [&](int ix_end) {
      if (run_start < 0) return;
      walls.push_back({{run_start * c, iy * c},
                       {ix_end * c, iy * c},
                       {0.0, run_dir > 0 ? 1.0 : -1.0}});
      run_start = -1;
    };
    for (int ix = 0; ix < w; ++ix) {
      const bool bb = g.blocked_cell(ix, iy - 1), bt = g.blocked_cell(ix, iy);
      int dir = 0;
      if (bb && !bt) dir = 1;
      else if (!bb && bt) dir = -1;
      if (dir != run_dir) {
        flush(ix);
        run_dir = dir;
        if (dir != 0) run_start = ix;
      }
    }
    flush(w);
  }
  return walls;
}

// ---- BFGW file format ----
// magic "BFGW", u32 version, u32 width, u32 height, f64 cell_size, u64 seed,
// row-major bit-packed occupancy (LSB first).

namespace detail {
inline void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
inline void read_bytes(std::ifstream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!in) throw io_error("unexpected end of file");
}
}  // namespace detail

inline void save_grid(const OccupancyGrid& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for write: " + path);
  const char magic[4] = {'B', 'F', 'G', 'W'};
  detail::write_bytes(out, magic, 4);
  const std::uint32_t version = 1, w = g.width_cells(), h = g.height_cells();
  detail::write_bytes(out, &version, 4);
  detail::write_bytes(out, &w, 4);
  detail::write_bytes(out, &h, 4);
  const double cs = g.cell_size();
  detail::write_bytes(out, &cs, 8);
  const std::uint64_t seed = g.seed();
  detail::write_bytes(out, &seed, 8);
  const auto& cells = g.raw_cells();
  std::vector<std::uint8_t> packed((cells.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  detail::write_bytes(out, packed.data(), packed.size());
  if (!out) throw io_error("write failed: " + path);
}

inline OccupancyGrid load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open for read: " + path);
  char magic[4];
  detail::read_bytes(in, magic, 4);
  if (std::string(magic, 4) != "BFGW") throw io_error("bad magic (expected BFGW): " + path);
  std::uint32_t version = 0, w = 0, h = 0;
  detail::read_bytes(in, &version, 4);
  if (version != 1) throw io_error("unsupported BFGW version");
  detail::read_bytes(in, &w, 4);
  detail::read_bytes(in, &h, 4);
  double cs = 0.0;
  detail::read_bytes(in, &cs, 8);
  std::uint64_t seed = 0;
  detail::read_bytes(in, &seed, 8);
  OccupancyGrid g(static_cast<int>(w), static_cast<int>(h), cs, seed);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<std::uint8_t> packed((n + 7) / 8);
  detail::read_bytes(in, packed.data(), packed.size());
  for (std::size_t i = 0; i < n; ++i)
    if (packed[i / 8] & (1u << (i % 8)))
      g.set_blocked(static_cast<int>(i % w), static_cast<int>(i / w), true);
  return g;
}

inline void grid_to_svg(const OccupancyGrid& g, const std::string& path) {
  SvgWriter svg(g.width_m(), g.height_m(), std::max(1.0, 800.0 / g.width_m()));
  const double c = g.cell_size();
  // merge blocked runs per row
  for (int iy = 0; iy < g.height_cells(); ++iy) {
    int run = -1;
    for (int ix = 0; ix <= g.width_cells(); ++ix) {
      const bool b = ix < g.width_cells() && g.blocked_cell(ix, iy);
      if (b && run < 0) run = ix;
      if (!b && run >= 0) {
        svg.rect(run * c, iy * c, (ix - run) * c, c, "#e8954f");
        run = -1;
      }
    }
  }
  svg.save(path);
}

}  // namespace bft::grid
