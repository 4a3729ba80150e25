// bft: beamformed-fingerprint trajectory toolkit.
// Pipeline: gen-env -> gen-dataset / gen-trajectories -> train -> estimate ->
// plan / bench / report. Every artifact embeds the seed and the effective
// config digest that produced it.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "bft/bench.hpp"
#include "bft/runconfig.hpp"

using namespace bft;
using nlohmann::json;

namespace {

cli::RunConfig load_effective_config(const std::string& config_path) {
  if (config_path.empty()) return {};
  return cli::RunConfig::load(config_path);
}

Vec2 parse_xy(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw config_error("expected 'x,y' but got '" + s + "'");
  try {
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw config_error("expected numeric 'x,y' but got '" + s + "'");
  }
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for write: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw io_error("write failed: " + path);
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open for read: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw io_error("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

rrt::SamplingRegion build_region(const std::string& kind, const Vec2& start, const Vec2& target,
                                 double step, const std::string& et_path, int et_index,
                                 double corridor_radius, double eps_explore) {
  if (kind == "uniform") return rrt::SamplingRegion::uniform();
  if (kind == "line") {
    std::vector<Position> wps;
    const double len = dist(start, target);
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int i = 0; i <= n; ++i) wps.push_back(lerp(start, target, static_cast<double>(i) / n));
    return rrt::SamplingRegion::corridor(std::move(wps), corridor_radius, eps_explore);
  }
  if (kind == "et") {
    if (et_path.empty()) throw config_error("--region et requires --et <predictions.json>");
    const json j = read_json(et_path);
    if (!j.contains("predictions") || !j.at("predictions").is_array() ||
        j.at("predictions").empty())
      throw io_error("no predictions in " + et_path);
    const auto& preds = j.at("predictions");
    if (et_index < 0 || et_index >= static_cast<int>(preds.size()))
      throw config_error("--et-index out of range");
    std::vector<Position> wps;
    for (const auto& p : preds.at(et_index).at("positions"))
      wps.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return rrt::SamplingRegion::corridor(std::move(wps), corridor_radius, eps_explore);
  }
  throw config_error("unknown region kind '" + kind + "' (uniform|line|et)");
}

int run(int argc, char** argv) {
  CLI::App app{"beamformed-fingerprint trajectory estimation and path determination toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  unsigned workers_flag = 0;
  app.add_option("--config", config_path, "run configuration JSON (strict keys)");
  app.add_option("--workers", workers_flag, "worker thread cap (or BFT_WORKERS)");

  // ---- gen-env ----
  auto* genenv = app.add_subcommand("gen-env", "generate a procedural city occupancy grid");
  struct {
    std::uint64_t seed = 7;
    int width = 401, height = 401;
    double cell = 1.0;
    int bw = 20, bh = 20, sw = 14;
    std::string out = "env.bfgw", svg;
    bool seed_set = false;
  } ge;
  genenv->add_option("--seed", ge.seed, "generator seed")->each([&](const std::string&) { ge.seed_set = true; });
  genenv->add_option("--width", ge.width, "grid width in cells");
  genenv->add_option("--height", ge.height, "grid height in cells");
  genenv->add_option("--cell-size", ge.cell, "cell size in meters");
  genenv->add_option("--block-w", ge.bw, "building block width in cells");
  genenv->add_option("--block-h", ge.bh, "building block height in cells");
  genenv->add_option("--street-w", ge.sw, "street width in cells");
  genenv->add_option("--out", ge.out, "output BFGW file");
  genenv->add_option("--svg", ge.svg, "optional SVG rendering");

  // ---- gen-dataset ----
  auto* gends = app.add_subcommand("gen-dataset", "fingerprint every free cell at a stride");
  struct {
    std::string grid, out = "dataset.bffd";
    int stride = 1;
    std::uint64_t seed = 7;
  } gd;
  gends->add_option("--grid", gd.grid, "input BFGW grid")->required();
  gends->add_option("--stride", gd.stride, "cell stride");
  gends->add_option("--seed", gd.seed, "noise seed");
  gends->add_option("--out", gd.out, "output BFFD file");

  // ---- gen-trajectories ----
  auto* gentr = app.add_subcommand("gen-trajectories", "generate a trajectory corpus");
  struct {
    std::string grid, out = "corpus.bftr", fingerprints, profile = "vehicle";
    int count = 100, length = 10, t_obs = -1;
    double sigma = -1.0;
    std::uint64_t seed = 7;
  } gt;
  gentr->add_option("--grid", gt.grid, "input BFGW grid")->required();
  gentr->add_option("--profile", gt.profile, "pedestrian|vehicle|hybrid");
  gentr->add_option("--count", gt.count, "number of trajectories");
  gentr->add_option("--length", gt.length, "positions per trajectory (L)");
  gentr->add_option("--tobs", gt.t_obs, "observed prefix length (default ceil(2L/3))");
  gentr->add_option("--sigma", gt.sigma, "noise sigma dB override for fingerprints");
  gentr->add_option("--seed", gt.seed, "corpus seed");
  gentr->add_option("--out", gt.out, "output BFTR file");
  gentr->add_option("--fingerprints", gt.fingerprints,
                    "also attach per-step fingerprints and write this BFFD file");

  // ---- train ----
  auto* traincmd = app.add_subcommand("train", "train the trajectory estimator");
  struct {
    std::string grid, corpus, fingerprints, out = "model.bfnn", loss_log = "loss.csv";
    std::string input_mode = "fingerprint";
    int epochs = -1, batch = -1;
    double lr = -1.0;
    std::uint64_t seed = 7;
  } tr;
  traincmd->add_option("--grid", tr.grid, "input BFGW grid")->required();
  traincmd->add_option("--corpus", tr.corpus, "input BFTR corpus")->required();
  traincmd->add_option("--fingerprints", tr.fingerprints, "companion BFFD (fingerprint mode)");
  traincmd->add_option("--input-mode", tr.input_mode, "fingerprint|position");
  traincmd->add_option("--epochs", tr.epochs, "epoch cap");
  traincmd->add_option("--batch", tr.batch, "batch size");
  traincmd->add_option("--lr", tr.lr, "learning rate");
  traincmd->add_option("--seed", tr.seed, "training seed");
  traincmd->add_option("--out", tr.out, "output BFNN checkpoint");
  traincmd->add_option("--loss-log", tr.loss_log, "per-epoch loss CSV");

  // ---- estimate ----
  auto* est = app.add_subcommand("estimate", "predict target segments for a corpus");
  struct {
    std::string model, corpus, fingerprints, out = "predictions.json";
    std::uint64_t seed = 7;
  } es;
  est->add_option("--model", es.model, "input BFNN checkpoint")->required();
  est->add_option("--corpus", es.corpus, "input BFTR corpus")->required();
  est->add_option("--fingerprints", es.fingerprints, "companion BFFD (fingerprint mode)");
  est->add_option("--seed", es.seed, "seed recorded in the artifact");
  est->add_option("--out", es.out, "output predictions JSON");

  // ---- plan ----
  auto* plancmd = app.add_subcommand("plan", "run a path determination query");
  struct {
    std::string grid, alg = "irrt-star", start = "215,193", target = "177,46";
    std::string out = "plan.json", svg, region = "line", et;
    int et_index = 0, iters = -1;
    double step = -1, eps = -1, radius = -1, corridor_radius = 60.0, eps_explore = 0.1;
    std::uint64_t seed = 7;
  } pl;
  plancmd->add_option("--grid", pl.grid, "input BFGW grid")->required();
  plancmd->add_option("--alg", pl.alg, "rrt|rrt-star|irrt-star");
  plancmd->add_option("--start", pl.start, "start position 'x,y' (m)");
  plancmd->add_option("--target", pl.target, "target position 'x,y' (m)");
  plancmd->add_option("--step", pl.step, "steer step size (m)");
  plancmd->add_option("--iters", pl.iters, "iteration budget");
  plancmd->add_option("--eps", pl.eps, "goal tolerance (m)");
  plancmd->add_option("--radius", pl.radius, "rewiring neighbor radius (m)");
  plancmd->add_option("--region", pl.region, "sampling region: uniform|line|et");
  plancmd->add_option("--et", pl.et, "predictions JSON for --region et");
  plancmd->add_option("--et-index", pl.et_index, "which prediction to use");
  plancmd->add_option("--corridor-radius", pl.corridor_radius, "corridor radius (m)");
  plancmd->add_option("--eps-explore", pl.eps_explore, "uniform fallback probability");
  plancmd->add_option("--seed", pl.seed, "planner seed");
  plancmd->add_option("--out", pl.out, "output plan JSON");
  plancmd->add_option("--svg", pl.svg, "optional tree/path SVG");

  // ---- bench ----
  auto* benchcmd = app.add_subcommand("bench", "paired-seed planner benchmark");
  struct {
    std::string grid, out = "bench.csv", svg_prefix, region = "line", et;
    std::string start = "215,193", target = "177,46";
    int iters = -1, seeds = 20, et_index = 0;
    double step = -1, eps = -1, radius = -1, corridor_radius = 60.0, eps_explore = 0.1;
    std::uint64_t seed = 7;
  } be;
  benchcmd->add_option("--grid", be.grid, "input BFGW grid")->required();
  benchcmd->add_option("--start", be.start, "start position 'x,y' (m)");
  benchcmd->add_option("--target", be.target, "target position 'x,y' (m)");
  benchcmd->add_option("--step", be.step, "steer step size (m)");
  benchcmd->add_option("--iters", be.iters, "iteration budget");
  benchcmd->add_option("--eps", be.eps, "goal tolerance (m)");
  benchcmd->add_option("--radius", be.radius, "rewiring neighbor radius (m)");
  benchcmd->add_option("--seeds", be.seeds, "number of paired seeds");
  benchcmd->add_option("--region", be.region, "sampling region: uniform|line|et");
  benchcmd->add_option("--et", be.et, "predictions JSON for --region et");
  benchcmd->add_option("--et-index", be.et_index, "which prediction to use");
  benchcmd->add_option("--corridor-radius", be.corridor_radius, "corridor radius (m)");
  benchcmd->add_option("--eps-explore", be.eps_explore, "uniform fallback probability");
  benchcmd->add_option("--seed", be.seed, "base seed");
  benchcmd->add_option("--out", be.out, "output CSV");
  benchcmd->add_option("--svg-prefix", be.svg_prefix, "write <prefix>-<alg>.svg overlays");

  // ---- report ----
  auto* repcmd = app.add_subcommand("report", "sequence-length / noise sweep CSV");
  struct {
    std::string grid, out = "sweep.csv", svg, profile = "vehicle";
    std::vector<int> lengths{5, 7, 10};
    std::vector<double> sigmas{6.0, 9.0};
    int corpus = 300, epochs = 30;
    std::uint64_t seed = 7;
  } rp;
  repcmd->add_option("--grid", rp.grid, "input BFGW grid")->required();
  repcmd->add_option("--profile", rp.profile, "pedestrian|vehicle|hybrid");
  repcmd->add_option("--lengths", rp.lengths, "sequence lengths to sweep");
  repcmd->add_option("--sigmas", rp.sigmas, "noise levels (dB) to evaluate");
  repcmd->add_option("--corpus", rp.corpus, "trajectories per length");
  repcmd->add_option("--epochs", rp.epochs, "training epochs per length");
  repcmd->add_option("--seed", rp.seed, "sweep seed");
  repcmd->add_option("--out", rp.out, "output CSV");
  repcmd->add_option("--svg", rp.svg, "optional error-vs-length chart");

  CLI11_PARSE(app, argc, argv);

  cli::RunConfig cfg = load_effective_config(config_path);
  const unsigned workers = env_workers(workers_flag ? workers_flag : cfg.workers);

  if (*genenv) {
    cfg.seed = ge.seed_set ? ge.seed : cfg.seed;
    cfg.grid = {ge.width, ge.height, ge.cell, {ge.bw, ge.bh, ge.sw}};
    const auto g = grid::generate_city_grid(cfg.seed, ge.width, ge.height, ge.cell,
                                            cfg.grid.blocks);
    grid::save_grid(g, ge.out);
    if (!ge.svg.empty()) grid::grid_to_svg(g, ge.svg);
    std::printf("gen-env: %dx%d cells, %zu free, digest %016llx -> %s\n", g.width_cells(),
                g.height_cells(), g.free_cell_count(),
                static_cast<unsigned long long>(g.digest()), ge.out.c_str());
    return 0;
  }

  if (*gends) {
    const auto g = grid::load_grid(gd.grid);
    cfg.seed = gd.seed;
    if (!g.is_free(cfg.scene.tx_position))
      cfg.scene.tx_position = grid::nearest_free_position(g, cfg.scene.tx_position);
    const auto ds = fp::build_dataset(g, cfg.codebook, cfg.scene, gd.stride, gd.seed, workers);
    fp::save_dataset(ds, cfg.codebook.num_beams, cfg.scene.n_samples, gd.out);
    std::printf("gen-dataset: %zu records, digest %016llx -> %s\n", ds.records.size(),
                static_cast<unsigned long long>(ds.digest()), gd.out.c_str());
    return 0;
  }

  if (*gentr) {
    const auto g = grid::load_grid(gt.grid);
    cfg.seed = gt.seed;
    if (gt.profile == "pedestrian")
      cfg.profile = traj::MotionProfile::pedestrian();
    else if (gt.profile == "vehicle")
      cfg.profile = traj::MotionProfile::vehicle();
    else if (gt.profile == "hybrid")
      cfg.profile = traj::MotionProfile::hybrid();
    else
      throw config_error("unknown profile '" + gt.profile + "'");
    if (gt.sigma >= 0.0) cfg.scene.noise_sigma_db = gt.sigma;
    if (!g.is_free(cfg.scene.tx_position))
      cfg.scene.tx_position = grid::nearest_free_position(g, cfg.scene.tx_position);
    const bool attach = !gt.fingerprints.empty();
    const auto corpus = traj::generate_corpus(g, cfg.profile, gt.count, gt.length, gt.seed,
                                              gt.t_obs, attach ? &cfg.codebook : nullptr,
                                              attach ? &cfg.scene : nullptr, workers);
    traj::save_corpus(corpus, gt.out, gt.fingerprints);
    std::printf("gen-trajectories: %d x L=%d (%s), digest %016llx -> %s\n", gt.count, gt.length,
                gt.profile.c_str(), static_cast<unsigned long long>(corpus.digest()),
                gt.out.c_str());
    return 0;
  }

  if (*traincmd) {
    const auto g = grid::load_grid(tr.grid);
    const auto corpus = traj::load_corpus(tr.corpus, tr.fingerprints);
    if (corpus.trajectories.empty()) throw io_error("empty corpus");
    if (tr.epochs >= 0) cfg.train.epochs = tr.epochs;
    if (tr.batch > 0) cfg.train.batch_size = tr.batch;
    if (tr.lr > 0) cfg.train.lr = tr.lr;
    cfg.train.seed = tr.seed;
    cfg.seed = tr.seed;

    tn::TransformerConfig mc = cfg.model;
    mc.mode = tr.input_mode == "position" ? tn::InputMode::position : tn::InputMode::fingerprint;
    const auto& first = corpus.trajectories.front();
    mc.t_obs = first.t_obs;
    mc.horizon = first.length() - first.t_obs;
    mc.coord = tn::CoordMap::from_grid(g);
    if (mc.mode == tn::InputMode::fingerprint) {
      if (!first.has_fingerprints())
        throw config_error("fingerprint input mode needs --fingerprints");
      mc.input_dim = first.fingerprints[0].beams() * first.fingerprints[0].samples();
    } else {
      mc.input_dim = 2;
    }
    cfg.model = mc;

    const auto split = traj::split_corpus(corpus.ids(), {0.70, 0.15, 0.15}, tr.seed);
    const auto res = tn::train(corpus, split.train, split.val, mc, cfg.train);
    tn::save_model(tr.out, res.params, mc);

    CsvDocument log;
    log.comments.push_back("# seed=" + std::to_string(tr.seed) +
                           " config_digest=" + std::to_string(cfg.digest()));
    log.header = {"epoch", "train_mse", "val_mse", "lr"};
    for (const auto& row : res.history)
      log.rows.push_back({std::to_string(row.epoch), fmt_double(row.train_mse_m2, 10),
                          fmt_double(row.val_mse_m2, 10), fmt_double(row.lr, 10)});
    log.save(tr.loss_log);
    std::printf("train: %zu epochs run, best val %.4g m^2 at epoch %d -> %s\n",
                res.history.size(), res.best_val_mse_m2, res.best_epoch, tr.out.c_str());
    return 0;
  }

  if (*est) {
    tn::TransformerConfig mc;
    const auto params = tn::load_model(es.model, &mc);
    const auto corpus = traj::load_corpus(es.corpus, es.fingerprints);
    json out;
    out["seed"] = es.seed;
    out["config_digest"] = cfg.digest();
    auto& preds = out["predictions"] = json::array();
    std::vector<json> rows(corpus.trajectories.size());
    parallel_for(corpus.trajectories.size(), workers, [&](std::size_t i) {
      const auto& t = corpus.trajectories[i];
      const auto p = tn::predict(t, params, mc);
      json r;
      r["id"] = t.id;
      auto& ps = r["positions"] = json::array();
      for (const auto& q : p.positions) ps.push_back({q.x, q.y});
      rows[i] = std::move(r);
    });
    for (auto& r : rows) preds.push_back(std::move(r));
    write_json(out, es.out);
    std::printf("estimate: %zu trajectories -> %s\n", corpus.trajectories.size(), es.out.c_str());
    return 0;
  }

  if (*plancmd) {
    const auto g = grid::load_grid(pl.grid);
    if (pl.step > 0) cfg.planner.step_size = pl.step;
    if (pl.iters > 0) cfg.planner.max_iterations = pl.iters;
    if (pl.eps > 0) cfg.planner.goal_tolerance = pl.eps;
    cfg.planner.neighbor_radius = pl.radius > 0 ? pl.radius : 2.0 * cfg.planner.step_size;
    cfg.planner.rng_seed = pl.seed;
    cfg.seed = pl.seed;
    const Vec2 start = parse_xy(pl.start), target = parse_xy(pl.target);
    const auto region = build_region(pl.region, start, target, cfg.planner.step_size, pl.et,
                                     pl.et_index, pl.corridor_radius, pl.eps_explore);
    const auto alg = rrt::algorithm_from_name(pl.alg);
    rrt::PlanTree tree;
    const auto res = rrt::plan(g, region, start, target, cfg.planner, alg, &tree);
    write_json(rrt::plan_to_json(res, alg, pl.seed, cfg.digest()), pl.out);
    if (!pl.svg.empty()) rrt::plan_to_svg(g, tree, res, start, target, pl.svg);
    std::printf("plan: %s %s cost %.2f m in %d iterations -> %s\n", pl.alg.c_str(),
                res.solved ? "solved," : "UNSOLVED;", res.total_cost, res.iterations_used,
                pl.out.c_str());
    return res.solved ? 0 : 5;
  }

  if (*benchcmd) {
    const auto g = grid::load_grid(be.grid);
    if (be.step > 0) cfg.planner.step_size = be.step;
    if (be.iters > 0) cfg.planner.max_iterations = be.iters;
    if (be.eps > 0) cfg.planner.goal_tolerance = be.eps;
    cfg.planner.neighbor_radius = be.radius > 0 ? be.radius : 2.0 * cfg.planner.step_size;
    cfg.planner.rng_seed = be.seed;
    cfg.seed = be.seed;
    const Vec2 start = parse_xy(be.start), target = parse_xy(be.target);
    const auto region = build_region(be.region, start, target, cfg.planner.step_size, be.et,
                                     be.et_index, be.corridor_radius, be.eps_explore);
    const auto res = bench::planner_benchmark(g, region, start, target, cfg.planner, be.seeds,
                                              workers);
    bench::planner_bench_csv(res, be.seed, cfg.digest()).save(be.out);
    for (const auto& row : res.rows)
      std::printf("bench: %-10s median cost %.2f m, median time %.3f s (%d/%d solved)\n",
                  row.algorithm.c_str(), row.median_cost_m, row.median_runtime_s, row.solved,
                  row.seeds);
    if (!be.svg_prefix.empty()) {
      for (const auto alg :
           {rrt::Algorithm::rrt, rrt::Algorithm::rrt_star, rrt::Algorithm::irrt_star}) {
        rrt::PlannerConfig pc = cfg.planner;
        pc.rng_seed = hash_mix(be.seed, 0ULL);
        rrt::PlanTree tree;
        const auto one = rrt::plan(g, region, start, target, pc, alg, &tree);
        rrt::plan_to_svg(g, tree, one, start, target,
                         be.svg_prefix + "-" + rrt::algorithm_name(alg) + ".svg");
      }
    }
    std::printf("bench: CSV -> %s\n", be.out.c_str());
    return 0;
  }

  if (*repcmd) {
    const auto g = grid::load_grid(rp.grid);
    if (rp.profile == "pedestrian")
      cfg.profile = traj::MotionProfile::pedestrian();
    else if (rp.profile == "vehicle")
      cfg.profile = traj::MotionProfile::vehicle();
    else if (rp.profile == "hybrid")
      cfg.profile = traj::MotionProfile::hybrid();
    else
      throw config_error("unknown profile '" + rp.profile + "'");
    if (!g.is_free(cfg.scene.tx_position))
      cfg.scene.tx_position = grid::nearest_free_position(g, cfg.scene.tx_position);
    cfg.seed = rp.seed;
    bench::SweepSettings st;
    st.lengths = rp.lengths;
    st.sigmas_db = rp.sigmas;
    st.corpus_size = rp.corpus;
    st.model = cfg.model;
    st.train = cfg.train;
    st.train.epochs = rp.epochs;
    st.train.seed = rp.seed;
    st.workers = workers;
    const auto rows = bench::sweep_sequence_length(g, cfg.codebook, cfg.scene, cfg.profile, st,
                                                   rp.seed);
    bench::sweep_csv(rows, rp.seed, cfg.digest()).save(rp.out);
    if (!rp.svg.empty()) bench::sweep_to_svg(rows, rp.svg);
    std::printf("report: %zu rows -> %s\n", rows.size(), rp.out.c_str());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const config_error& e) {
    std::cerr << "error [config]: " << e.what() << "\n";
    return 2;
  } catch (const io_error& e) {
    std::cerr << "error [io]: " << e.what() << "\n";
    return 3;
  } catch (const numeric_error& e) {
    std::cerr << "error [numeric]: " << e.what() << "\n";
    return 4;
  } catch (const budget_error& e) {
    std::cerr << "error [budget]: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
