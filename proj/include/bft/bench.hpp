#pragma once
// Metrics and experiment drivers: trajectory RMSE (whole-residual-vector
// reading plus per-point mean distance), nearest-rank 95th percentile,
// sequence-length/noise sweeps, and the three-planner benchmark.

#include <algorithm>
#include <string>
#include <vector>

#include "bft/common.hpp"
#include "bft/csv.hpp"
#include "bft/planner.hpp"
#include "bft/transformer.hpp"

namespace bft::bench {

struct TrajectoryMetrics {
  double rmse_m = 0.0;            // sqrt(mean over trajectories of ||residual vector||^2)
  double rmse_per_point_m = 0.0;  // mean Euclidean point distance
  double p95_m = 0.0;             // nearest-rank p95 of per-trajectory errors
  std::vector<double> per_trajectory_errors;
  std::size_t n = 0;
};

// Nearest-rank percentile: smallest v with >= 95% of errors <= v.
inline double percentile95(std::vector<double> errors) {
  if (errors.empty()) throw config_error("percentile95: empty input");
  std::sort(errors.begin(), errors.end());
  const std::size_t rank =
      static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(errors.size())));
  return errors[std::max<std::size_t>(rank, 1) - 1];
}

// RMSE = sqrt( (1/N) sum_n || ybar_n - yhat_n ||^2 ), the norm taken over the
// concatenated target-segment coordinates of trajectory n.
inline TrajectoryMetrics evaluate(const std::vector<tn::PredictedTrajectory>& predicted,
                                  const std::vector<tn::PredictedTrajectory>& truth) {
  if (predicted.size() != truth.size() || predicted.empty())
    throw config_error("evaluate: prediction/truth lists must align and be non-empty");
  TrajectoryMetrics m;
  m.n = predicted.size();
  double sq_sum = 0.0, point_sum = 0.0;
  std::size_t point_count = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& p = predicted[i];
    const auto& t = truth[i];
    if (p.trajectory_id != t.trajectory_id)
      throw config_error("evaluate: trajectory ids misaligned");
    if (p.positions.size() != t.positions.size())
      throw config_error("evaluate: horizon mismatch");
    double sq = 0.0;
    for (std::size_t k = 0; k < p.positions.size(); ++k) {
      const double d2 = (p.positions[k] - t.positions[k]).norm2();
      sq += d2;
      point_sum += std::sqrt(d2);
      ++point_count;
    }
    sq_sum += sq;
    m.per_trajectory_errors.push_back(std::sqrt(sq));
  }
  m.rmse_m = std::sqrt(sq_sum / static_cast<double>(m.n));
  m.rmse_per_point_m = point_sum / static_cast<double>(point_count);
  m.p95_m = percentile95(m.per_trajectory_errors);
  return m;
}

inline std::vector<tn::PredictedTrajectory> truth_segments(
    const std::vector<const traj::Trajectory*>& items, int t_obs, int horizon) {
  std::vector<tn::PredictedTrajectory> out;
  out.reserve(items.size());
  for (const auto* t : items) {
    tn::PredictedTrajectory p;
    p.trajectory_id = t->id;
    for (int k = 0; k < horizon; ++k) p.positions.push_back(t->positions[t_obs + k]);
    out.push_back(std::move(p));
  }
  return out;
}

// A target segment "contains a turn" when some consecutive heading change in
// it exceeds the threshold, or the user stops.
inline bool turn_containing(const traj::Trajectory& t, double threshold_rad = M_PI / 12) {
  for (int l = std::max(1, t.t_obs - 1); l + 1 < t.length(); ++l) {
    const Vec2 a = t.positions[l] - t.positions[l - 1];
    const Vec2 b = t.positions[l + 1] - t.positions[l];
    if (a.norm() < 1e-9 || b.norm() < 1e-9) return true;
    if (std::abs(wrap_angle(angle_of(b) - angle_of(a))) > threshold_rad) return true;
  }
  return false;
}

struct PlannerBenchRow {
  std::string algorithm;
  double median_cost_m = 0.0;
  double median_runtime_s = 0.0;
  int solved = 0;
  int seeds = 0;
};

struct PlannerRunRecord {
  std::string algorithm;
  std::uint64_t seed = 0;
  double cost_m = 0.0;
  double runtime_s = 0.0;
  int iterations = 0;
  bool solved = false;
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw config_error("median: empty input");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct PlannerBenchResult {
  std::vector<PlannerBenchRow> rows;       // one per algorithm
  std::vector<PlannerRunRecord> records;   // one per (algorithm, seed)
};

// Runs all three planners per seed on one scenario; medians per algorithm.
inline PlannerBenchResult planner_benchmark(const grid::OccupancyGrid& g,
                                            const rrt::SamplingRegion& region,
                                            const Position& start, const Position& target,
                                            const rrt::PlannerConfig& base_cfg, int n_seeds,
                                            unsigned workers = 1) {
  if (n_seeds < 1) throw config_error("planner_benchmark: need at least one seed");
  const rrt::Algorithm algs[3] = {rrt::Algorithm::rrt, rrt::Algorithm::rrt_star,
                                  rrt::Algorithm::irrt_star};
  PlannerBenchResult out;
  out.records.resize(static_cast<std::size_t>(n_seeds) * 3);
  parallel_for(out.records.size(), workers, [&](std::size_t k) {
    const int seed = static_cast<int>(k / 3);
    const rrt::Algorithm alg = algs[k % 3];
    rrt::PlannerConfig cfg = base_cfg;
    cfg.rng_seed = hash_mix(base_cfg.rng_seed, static_cast<std::uint64_t>(seed));
    const auto res = rrt::plan(g, region, start, target, cfg, alg);
    out.records[k] = {rrt::algorithm_name(alg), static_cast<std::uint64_t>(seed),
                      res.solved ? res.total_cost : rrt::kInf, res.wall_time_s,
                      res.iterations_used, res.solved};
  });
  for (const auto alg : algs) {
    PlannerBenchRow row;
    row.algorithm = rrt::algorithm_name(alg);
    std::vector<double> costs, times;
    for (const auto& r : out.records)
      if (r.algorithm == row.algorithm) {
        costs.push_back(r.cost_m);
        times.push_back(r.runtime_s);
        row.solved += r.solved;
        ++row.seeds;
      }
    row.median_cost_m = median(costs);
    row.median_runtime_s = median(times);
    out.rows.push_back(row);
  }
  return out;
}

inline CsvDocument planner_bench_csv(const PlannerBenchResult& res, std::uint64_t seed,
                                     std::uint64_t config_digest) {
  CsvDocument doc;
  doc.comments.push_back("# seed=" + std::to_string(seed) +
                         " config_digest=" + std::to_string(config_digest));
  doc.header = {"algorithm", "seed", "cost_m", "runtime_s", "iterations", "solved"};
  for (const auto& r : res.records)
    doc.rows.push_back({r.algorithm, std::to_string(r.seed), fmt_double(r.cost_m, 10),
                        fmt_double(r.runtime_s, 6), std::to_string(r.iterations),
                        r.solved ? "1" : "0"});
  return doc;
}

struct SweepRow {
  std::string profile;
  int length = 0;
  double sigma_db = 0.0;
  std::string model;  // "tn" or "cv"
  double rmse_m = 0.0;
  double rmse_per_point_m = 0.0;
  double p95_m = 0.0;
  std::size_t n = 0;
};

inline CsvDocument sweep_csv(const std::vector<SweepRow>& rows, std::uint64_t seed,
                             std::uint64_t config_digest) {
  CsvDocument doc;
  doc.comments.push_back("# seed=" + std::to_string(seed) +
                         " config_digest=" + std::to_string(config_digest));
  doc.header = {"profile", "L", "sigma_db", "model", "rmse_m", "rmse_per_point_m", "p95_m", "n"};
  for (const auto& r : rows)
    doc.rows.push_back({r.profile, std::to_string(r.length), fmt_double(r.sigma_db, 6), r.model,
                        fmt_double(r.rmse_m, 10), fmt_double(r.rmse_per_point_m, 10),
                        fmt_double(r.p95_m, 10), std::to_string(r.n)});
  return doc;
}

struct SweepSettings {
  std::vector<int> lengths{5, 7, 10, 15};
  std::vector<double> sigmas_db{6.0, 9.0};
  int corpus_size = 300;
  tn::InputMode mode = tn::InputMode::fingerprint;
  tn::TransformerConfig model;  // t_obs/horizon/input_dim/coord set per L
  tn::TrainOptions train;
  unsigned workers = 1;
};

// Per (L, profile): generate a fingerprint corpus at the first sigma, train a
// model, then evaluate TN and the constant-velocity baseline at every sigma
// (test fingerprints regenerated per sigma; same trajectories).
inline std::vector<SweepRow> sweep_sequence_length(const grid::OccupancyGrid& g,
                                                   const fp::BeamCodebook& codebook,
                                                   const fp::ChannelScene& scene_base,
                                                   const traj::MotionProfile& profile,
                                                   const SweepSettings& settings,
                                                   std::uint64_t seed) {
  std::vector<SweepRow> rows;
  const bool fp_mode = settings.mode == tn::InputMode::fingerprint;
  for (int L : settings.lengths) {
    fp::ChannelScene scene = scene_base;
    scene.noise_sigma_db = settings.sigmas_db.front();
    const std::uint64_t corpus_seed = hash_mix(seed, static_cast<std::uint64_t>(L));
    auto corpus = traj::generate_corpus(g, profile, settings.corpus_size, L, corpus_seed, -1,
                                        fp_mode ? &codebook : nullptr, fp_mode ? &scene : nullptr,
                                        settings.workers);
    const auto split = traj::split_corpus(corpus.ids(), {0.70, 0.15, 0.15}, corpus_seed);

    tn::TransformerConfig cfg = settings.model;
    cfg.mode = settings.mode;
    cfg.t_obs = traj::default_t_obs(L);
    cfg.horizon = L - cfg.t_obs;
    cfg.input_dim = fp_mode ? codebook.num_beams * scene.n_samples : 2;
    cfg.coord = tn::CoordMap::from_grid(g);
    const auto trained = tn::train(corpus, split.train, split.val, cfg, settings.train);

    std::map<std::uint64_t, const traj::Trajectory*> by_id;
    for (const auto& t : corpus.trajectories) by_id[t.id] = &t;
    std::vector<const traj::Trajectory*> test_items;
    for (auto id : split.test) test_items.push_back(by_id.at(id));

    const auto walls = grid::extract_walls(g);
    for (double sigma : settings.sigmas_db) {
      fp::ChannelScene eval_scene = scene_base;
      eval_scene.noise_sigma_db = sigma;
      std::vector<tn::PredictedTrajectory> tn_pred(test_items.size()), cv_pred(test_items.size());
      std::vector<traj::Trajectory> eval_copy(test_items.size());
      parallel_for(test_items.size(), settings.workers, [&](std::size_t i) {
        traj::Trajectory t = *test_items[i];
        if (fp_mode)
          t = traj::attach_fingerprints(std::move(t), g, codebook, eval_scene,
                                        hash_mix(seed, 0x657661ULL, t.id, bits_of(sigma)), &walls);
        tn_pred[i] = tn::predict(t, trained.params, cfg);
        cv_pred[i] = tn::constant_velocity_baseline(
            {t.positions.begin(), t.positions.begin() + cfg.t_obs}, cfg.horizon, t.id);
        eval_copy[i] = std::move(t);
      });
      std::vector<const traj::Trajectory*> eval_ptrs;
      for (const auto& t : eval_copy) eval_ptrs.push_back(&t);
      const auto truth = truth_segments(eval_ptrs, cfg.t_obs, cfg.horizon);
      const auto m_tn = evaluate(tn_pred, truth);
      const auto m_cv = evaluate(cv_pred, truth);
      rows.push_back({traj::kind_name(profile.kind), L, sigma, "tn", m_tn.rmse_m,
                      m_tn.rmse_per_point_m, m_tn.p95_m, m_tn.n});
      rows.push_back({traj::kind_name(profile.kind), L, sigma, "cv", m_cv.rmse_m,
                      m_cv.rmse_per_point_m, m_cv.p95_m, m_cv.n});
    }
  }
  return rows;
}

// RMSE-versus-sequence-length line chart, one polyline per model, drawn for
// the first noise level in the rows.
inline void sweep_to_svg(const std::vector<SweepRow>& rows, const std::string& path) {
  if (rows.empty()) throw config_error("sweep_to_svg: no rows");
  const double sigma0 = rows.front().sigma_db;
  std::vector<int> lengths;
  double max_rmse = 0.0;
  for (const auto& r : rows)
    if (r.sigma_db == sigma0) {
      if (std::find(lengths.begin(), lengths.end(), r.length) == lengths.end())
        lengths.push_back(r.length);
      max_rmse = std::max(max_rmse, r.rmse_m);
    }
  std::sort(lengths.begin(), lengths.end());
  const double W = 200, H = 140, mx = 30, my = 20;  // world units for the writer
  SvgWriter svg(W, H, 4.0);
  svg.line({mx, my}, {W - 10, my}, "#2d3436", 1.5);
  svg.line({mx, my}, {mx, H - 10}, "#2d3436", 1.5);
  const char* colors[2] = {"#0984e3", "#d63031"};
  const std::string models[2] = {"tn", "cv"};
  auto sx = [&](std::size_t i) {
    return lengths.size() < 2 ? mx : mx + (W - mx - 15) * i / (lengths.size() - 1.0);
  };
  auto sy = [&](double v) { return my + (H - my - 15) * (max_rmse > 0 ? v / max_rmse : 0.0); };
  for (int m = 0; m < 2; ++m) {
    Vec2 prev{0, 0};
    bool has_prev = false;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      for (const auto& r : rows)
        if (r.sigma_db == sigma0 && r.length == lengths[i] && r.model == models[m]) {
          const Vec2 pt{sx(i), sy(r.rmse_m)};
          svg.circle(pt, 3.0, colors[m]);
          if (has_prev) svg.line(prev, pt, colors[m], 1.5);
          prev = pt;
          has_prev = true;
        }
    }
  }
  svg.save(path);
}

}  // namespace bft::bench
