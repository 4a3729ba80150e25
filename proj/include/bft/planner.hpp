#pragma once
// Sampling-based path determination over estimated-trajectory regions:
// RRT, RRT*, and informed RRT* with ellipsoidal sample focusing after the
// first solution. Costs are Euclidean; c_total = c(node) + dist(node, target).

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bft/common.hpp"
#include "bft/geometry.hpp"
#include "bft/grid.hpp"
#include "bft/svg.hpp"

namespace bft::rrt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct TreeNode {
  Position position;
  int parent = -1;  // -1 for the root
  double cost_to_root = 0.0;
};

struct PlanTree {
  std::vector<TreeNode> nodes;
  std::vector<std::vector<int>> children;

  void init(const Position& root) {
    nodes.assign(1, {root, -1, 0.0});
    children.assign(1, {});
  }

  int add(const Position& p, int parent, double edge_len) {
    nodes.push_back({p, parent, nodes[parent].cost_to_root + edge_len});
    children[parent].push_back(static_cast<int>(nodes.size()) - 1);
    children.emplace_back();
    return static_cast<int>(nodes.size()) - 1;
  }

  // re-parent `idx` onto `new_parent`, shifting subtree costs by the delta
  void reparent(int idx, int new_parent, double new_cost) {
    auto& kids = children[nodes[idx].parent];
    kids.erase(std::find(kids.begin(), kids.end(), idx));
    children[new_parent].push_back(idx);
    const double delta = new_cost - nodes[idx].cost_to_root;
    nodes[idx].parent = new_parent;
    std::vector<int> stack{idx};
    while (!stack.empty()) {
      const int k = stack.back();
      stack.pop_back();
      nodes[k].cost_to_root += delta;
      for (int c : children[k]) stack.push_back(c);
    }
  }

  std::vector<Position> path_to(int idx) const {
    std::vector<Position> out;
    for (int k = idx; k >= 0; k = nodes[k].parent) out.push_back(nodes[k].position);
    std::reverse(out.begin(), out.end());
    return out;
  }
};

enum class RegionMode : std::uint8_t { uniform_free = 0, et_corridor = 1, informed_ellipse = 2 };

struct SamplingRegion {
  RegionMode mode = RegionMode::uniform_free;
  std::vector<Position> et_waypoints;
  double corridor_radius = 10.0;
  double exploration_eps = 0.1;  // uniform fallback probability in corridor mode
  Position focus_a, focus_b;
  double c_best = kInf;  // transverse diameter of the informed ellipse

  static SamplingRegion uniform() { return {}; }

  static SamplingRegion corridor(std::vector<Position> waypoints, double radius,
                                 double eps = 0.1) {
    if (radius <= 0.0) throw config_error("sampling region: corridor radius must be positive");
    SamplingRegion r;
    r.mode = RegionMode::et_corridor;
    r.et_waypoints = std::move(waypoints);
    r.corridor_radius = radius;
    r.exploration_eps = eps;
    return r;
  }

  static SamplingRegion ellipse(const Position& a, const Position& b, double c_best) {
    if (c_best < dist(a, b) - 1e-9)
      throw config_error("sampling region: c_best smaller than the focal distance");
    SamplingRegion r;
    r.mode = RegionMode::informed_ellipse;
    r.focus_a = a;
    r.focus_b = b;
    r.c_best = c_best;
    return r;
  }
};

struct PlannerConfig {
  double step_size = 5.0;
  double goal_tolerance = 5.0;  // epsilon
  int max_iterations = 1000;
  double neighbor_radius = 10.0;  // NearC circle; default 2 * step_size
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (step_size <= 0.0) throw config_error("planner config: step_size must be positive");
    if (goal_tolerance <= 0.0) throw config_error("planner config: goal tolerance must be positive");
    if (max_iterations < 1) throw config_error("planner config: max_iterations must be >= 1");
    if (neighbor_radius <= 0.0) throw config_error("planner config: neighbor_radius must be positive");
  }
};

struct PlanResult {
  std::vector<Position> path;  // start .. goal-region node; empty if unsolved
  double total_cost = kInf;    // c(goal) + dist(goal, target)
  int iterations_used = 0;
  double wall_time_s = 0.0;
  bool solved = false;
};

// Optional instrumentation for invariant checks.
struct PlanTrace {
  std::vector<Position> samples_after_solution;
  std::vector<double> c_best_at_sample;  // incumbent when each sample was drawn
  std::vector<double> c_best_per_iteration;
};

namespace detail {

inline Position sample_uniform_free(const grid::OccupancyGrid& g,
                                    const std::vector<std::pair<int, int>>& free_cells,
                                    DetRng& rng) {
  const auto [ix, iy] = free_cells[rng.uniform_below(free_cells.size())];
  return {(ix + rng.uniform01()) * g.cell_size(), (iy + rng.uniform01()) * g.cell_size()};
}

}  // namespace detail

// Draw one position from the region, rejecting non-free points; throws
// budget_error after 1e4 consecutive rejections (degenerate region).
inline Position sample(const SamplingRegion& region, const grid::OccupancyGrid& g,
                       const std::vector<std::pair<int, int>>& free_cells, DetRng& rng) {
  if (free_cells.empty()) throw config_error("sample: grid has no free cell");
  for (int attempt = 0; attempt < 10000; ++attempt) {
    switch (region.mode) {
      case RegionMode::uniform_free:
        return detail::sample_uniform_free(g, free_cells, rng);
      case RegionMode::et_corridor: {
        if (region.et_waypoints.empty() || rng.uniform01() < region.exploration_eps)
          return detail::sample_uniform_free(g, free_cells, rng);
        const Position& c = region.et_waypoints[rng.uniform_below(region.et_waypoints.size())];
        const double r = region.corridor_radius * std::sqrt(rng.uniform01());
        const double th = rng.uniform(0.0, 2.0 * M_PI);
        const Position p = c + unit_from_angle(th) * r;
        if (g.is_free(p)) return p;
        break;
      }
      case RegionMode::informed_ellipse: {
        if (!(region.c_best < kInf)) {
          // pre-solution regime behaves as the fallback sampler
          return detail::sample_uniform_free(g, free_cells, rng);
        }
        const double c_f = dist(region.focus_a, region.focus_b);
        const double a = region.c_best / 2.0;
        const double b = std::sqrt(std::max(0.0, region.c_best * region.c_best - c_f * c_f)) / 2.0;
        // uniform unit-disk sample mapped by the ellipse affine transform
        const double r = std::sqrt(rng.uniform01());
        const double th = rng.uniform(0.0, 2.0 * M_PI);
        const double ux = r * std::cos(th), uy = r * std::sin(th);
        const Position mid = lerp(region.focus_a, region.focus_b, 0.5);
        const double rot = c_f > 0.0 ? angle_of(region.focus_b - region.focus_a) : 0.0;
        const double ca = std::cos(rot), sa = std::sin(rot);
        const Position p{mid.x + a * ux * ca - b * uy * sa, mid.y + a * ux * sa + b * uy * ca};
        if (g.is_free(p)) return p;
        break;
      }
    }
  }
  throw budget_error("sample: 10^4 consecutive rejections; region is degenerate");
}

inline Position sample(const SamplingRegion& region, const grid::OccupancyGrid& g, DetRng& rng) {
  const auto free_cells = g.free_cells();
  return sample(region, g, free_cells, rng);
}

// Nearest node by Euclidean distance; ties resolve to the lowest index.
inline int near(const PlanTree& tree, const Position& p) {
  if (tree.nodes.empty()) throw config_error("near: empty tree");
  int best = 0;
  double best_d = dist(tree.nodes[0].position, p);
  for (int i = 1; i < static_cast<int>(tree.nodes.size()); ++i) {
    const double d = dist(tree.nodes[i].position, p);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// Fixed-step steering toward y_rand, clamped to y_rand when within reach.
inline Position steer(const Position& y_rand, const Position& y_near, double step_size) {
  const Vec2 d = y_rand - y_near;
  const double n = d.norm();
  if (n == 0.0) throw config_error("steer: y_rand == y_near is degenerate");
  if (n <= step_size) return y_rand;
  return y_near + d * (step_size / n);
}

// All nodes within `radius` (inclusive boundary).
inline std::vector<int> near_c(const PlanTree& tree, const Position& p, double radius) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(tree.nodes.size()); ++i)
    if (dist(tree.nodes[i].position, p) <= radius) out.push_back(i);
  return out;
}

// Cheapest collision-free parent for y_new among candidates + y_near.
inline std::optional<int> choose_parent(const PlanTree& tree, const std::vector<int>& candidates,
                                        int y_near_idx, const Position& y_new,
                                        const grid::OccupancyGrid& g) {
  std::optional<int> best;
  double best_cost = kInf;
  auto consider = [&](int idx) {
    const double c = tree.nodes[idx].cost_to_root + dist(tree.nodes[idx].position, y_new);
    if (c < best_cost - 1e-12 &&
        grid::collision_free_segment(g, tree.nodes[idx].position, y_new)) {
      best_cost = c;
      best = idx;
    }
  };
  consider(y_near_idx);
  for (int idx : candidates)
    if (idx != y_near_idx) consider(idx);
  return best;
}

// Re-parent neighbors through the new node when strictly cheaper; subtree
// costs are updated and never increase.
inline void rewire(PlanTree& tree, const std::vector<int>& neighbors, int new_idx,
                   const grid::OccupancyGrid& g) {
  const auto& nn = tree.nodes[new_idx];
  for (int idx : neighbors) {
    if (idx == new_idx || idx == nn.parent || idx == 0) continue;
    const double via = nn.cost_to_root + dist(nn.position, tree.nodes[idx].position);
    if (via < tree.nodes[idx].cost_to_root - 1e-12 &&
        grid::collision_free_segment(g, nn.position, tree.nodes[idx].position))
      tree.reparent(idx, new_idx, via);
  }
}

inline double path_cost(const PlanTree& tree, int idx) { return tree.nodes[idx].cost_to_root; }

inline double total_cost(const PlanTree& tree, int idx, const Position& target) {
  return tree.nodes[idx].cost_to_root + dist(tree.nodes[idx].position, target);
}

enum class Algorithm : std::uint8_t { rrt = 0, rrt_star = 1, irrt_star = 2 };

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::rrt: return "rrt";
    case Algorithm::rrt_star: return "rrt-star";
    case Algorithm::irrt_star: return "irrt-star";
  }
  return "?";
}

inline Algorithm algorithm_from_name(const std::string& s) {
  if (s == "rrt") return Algorithm::rrt;
  if (s == "rrt-star") return Algorithm::rrt_star;
  if (s == "irrt-star") return Algorithm::irrt_star;
  throw config_error("unknown planner algorithm: " + s);
}

inline PlanResult plan(const grid::OccupancyGrid& g, const SamplingRegion& region,
                       const Position& start, const Position& target, const PlannerConfig& cfg,
                       Algorithm alg, PlanTree* tree_out = nullptr, PlanTrace* trace = nullptr) {
  cfg.validate();
  if (!g.is_free(start)) throw config_error("plan: start position is not free");
  if (!g.is_free(target)) throw config_error("plan: target position is not free");

  const auto t0 = std::chrono::steady_clock::now();
  const auto free_cells = g.free_cells();
  DetRng rng(hash_mix(cfg.rng_seed, 0x706c616eULL, static_cast<std::uint64_t>(alg)));

  PlanTree tree;
  tree.init(start);
  std::vector<int> goal_nodes;
  double c_best = kInf;
  if (dist(start, target) <= cfg.goal_tolerance) {
    goal_nodes.push_back(0);
    c_best = dist(start, target);
  }

  SamplingRegion live = region;
  int it = 0;
  for (; it < cfg.max_iterations && !(alg == Algorithm::rrt && !goal_nodes.empty()); ++it) {
    if (alg == Algorithm::irrt_star && c_best < kInf) {
      live = SamplingRegion::ellipse(start, target, c_best);
    }
    const Position y_rand = sample(live, g, free_cells, rng);
    if (trace && c_best < kInf) {
      trace->samples_after_solution.push_back(y_rand);
      trace->c_best_at_sample.push_back(c_best);
    }
    const int near_idx = near(tree, y_rand);
    if (y_rand == tree.nodes[near_idx].position) continue;
    const Position y_new = steer(y_rand, tree.nodes[near_idx].position, cfg.step_size);
    if (!grid::collision_free_segment(g, tree.nodes[near_idx].position, y_new)) continue;

    int new_idx;
    if (alg == Algorithm::rrt) {
      new_idx = tree.add(y_new, near_idx, dist(tree.nodes[near_idx].position, y_new));
    } else {
      const auto neighbors = near_c(tree, y_new, cfg.neighbor_radius);
      const auto parent = choose_parent(tree, neighbors, near_idx, y_new, g);
      if (!parent) continue;
      new_idx = tree.add(y_new, *parent, dist(tree.nodes[*parent].position, y_new));
      rewire(tree, neighbors, new_idx, g);
    }
    if (dist(y_new, target) <= cfg.goal_tolerance) goal_nodes.push_back(new_idx);

    // rewiring can improve existing goal nodes, so refresh the incumbent
    for (int gn : goal_nodes) c_best = std::min(c_best, total_cost(tree, gn, target));
    if (trace) trace->c_best_per_iteration.push_back(c_best);
    if (c_best <= dist(start, target) + 1e-12) {
      ++it;
      break;  // straight-line optimum reached; the ellipse has zero area
    }
  }

  PlanResult res;
  res.iterations_used = it;
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!goal_nodes.empty()) {
    int best = goal_nodes[0];
    for (int gn : goal_nodes)
      if (total_cost(tree, gn, target) < total_cost(tree, best, target)) best = gn;
    res.path = tree.path_to(best);
    res.total_cost = total_cost(tree, best, target);
    res.solved = true;
  }
  if (tree_out) *tree_out = std::move(tree);
  return res;
}

inline PlanResult rrt_plan(const grid::OccupancyGrid& g, const SamplingRegion& r,
                           const Position& s, const Position& t, const PlannerConfig& c,
                           PlanTree* tree = nullptr, PlanTrace* trace = nullptr) {
  return plan(g, r, s, t, c, Algorithm::rrt, tree, trace);
}
inline PlanResult rrt_star_plan(const grid::OccupancyGrid& g, const SamplingRegion& r,
                                const Position& s, const Position& t, const PlannerConfig& c,
                                PlanTree* tree = nullptr, PlanTrace* trace = nullptr) {
  return plan(g, r, s, t, c, Algorithm::rrt_star, tree, trace);
}
inline PlanResult irrt_star_plan(const grid::OccupancyGrid& g, const SamplingRegion& r,
                                 const Position& s, const Position& t, const PlannerConfig& c,
                                 PlanTree* tree = nullptr, PlanTrace* trace = nullptr) {
  return plan(g, r, s, t, c, Algorithm::irrt_star, tree, trace);
}

// Full-tree invariant audit: parent links acyclic, stored costs equal
// recomputed root-path lengths, and every edge collision-free.
inline void validate_tree(const PlanTree& tree, const grid::OccupancyGrid& g,
                          double tol = 1e-9) {
  const int n = static_cast<int>(tree.nodes.size());
  if (n == 0) throw numeric_error("tree: empty");
  if (tree.nodes[0].parent != -1 || tree.nodes[0].cost_to_root != 0.0)
    throw numeric_error("tree: bad root");
  for (int i = 1; i < n; ++i) {
    const auto& nd = tree.nodes[i];
    if (nd.parent < 0 || nd.parent >= n) throw numeric_error("tree: bad parent index");
    int hops = 0;
    for (int k = i; k >= 0; k = tree.nodes[k].parent)
      if (++hops > n) throw numeric_error("tree: cycle detected");
    const auto& pa = tree.nodes[nd.parent];
    const double want = pa.cost_to_root + dist(pa.position, nd.position);
    if (std::abs(want - nd.cost_to_root) > tol)
      throw numeric_error("tree: cost_to_root inconsistent");
    if (!grid::collision_free_segment(g, pa.position, nd.position))
      throw numeric_error("tree: edge collides");
  }
}

inline nlohmann::json plan_to_json(const PlanResult& res, Algorithm alg, std::uint64_t seed,
                                   std::uint64_t config_digest) {
  nlohmann::json j;
  j["seed"] = seed;
  j["algorithm"] = algorithm_name(alg);
  j["iterations"] = res.iterations_used;
  j["solved"] = res.solved;
  j["total_cost_m"] = res.solved ? nlohmann::json(res.total_cost) : nlohmann::json();
  j["wall_time_s"] = res.wall_time_s;
  j["config_digest"] = config_digest;
  auto& path = j["path"] = nlohmann::json::array();
  for (const auto& p : res.path) path.push_back({p.x, p.y});
  return j;
}

// Green tree edges, red final path, orange obstacles.
inline void plan_to_svg(const grid::OccupancyGrid& g, const PlanTree& tree,
                        const PlanResult& res, const Position& start, const Position& target,
                        const std::string& path) {
  SvgWriter svg(g.width_m(), g.height_m(), std::max(1.0, 900.0 / g.width_m()));
  const double c = g.cell_size();
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
  for (std::size_t i = 1; i < tree.nodes.size(); ++i)
    svg.line(tree.nodes[tree.nodes[i].parent].position, tree.nodes[i].position, "#2e8b57", 0.6);
  for (std::size_t i = 1; i < res.path.size(); ++i)
    svg.line(res.path[i - 1], res.path[i], "#d63031", 2.0);
  for (const auto& p : res.path) svg.circle(p, 2.0, "#d63031");
  svg.circle(start, 4.0, "#0984e3");
  svg.circle(target, 4.0, "#6c5ce7");
  svg.save(path);
}

}  // namespace bft::rrt
