#pragma once
// Versioned JSON run configuration shared by the CLI subcommands. Parsing is
// fail-closed: unknown keys anywhere are configuration errors.

#include <json.hpp>

#include <fstream>
#include <set>
#include <string>

#include "bft/bench.hpp"
#include "bft/fingerprint.hpp"
#include "bft/grid.hpp"
#include "bft/planner.hpp"
#include "bft/trajectory.hpp"
#include "bft/transformer.hpp"

namespace bft::cli {

using nlohmann::json;

struct GridSpec {
  int width_cells = 401;
  int height_cells = 401;
  double cell_size = 1.0;
  grid::BlockSpec blocks{20, 20, 14};
};

struct RunConfig {
  std::uint64_t seed = 7;
  unsigned workers = 0;  // 0: resolve from --workers / BFT_WORKERS / 1
  GridSpec grid;
  fp::ChannelScene scene;
  fp::BeamCodebook codebook = fp::BeamCodebook::uniform(32);
  traj::MotionProfile profile = traj::MotionProfile::vehicle();
  tn::TransformerConfig model;
  tn::TrainOptions train;
  rrt::PlannerConfig planner;

  json to_json() const {
    json j;
    j["version"] = 1;
    j["seed"] = seed;
    j["workers"] = workers;
    j["grid"] = {{"width_cells", grid.width_cells},
                 {"height_cells", grid.height_cells},
                 {"cell_size", grid.cell_size},
                 {"block_w", grid.blocks.block_w},
                 {"block_h", grid.blocks.block_h},
                 {"street_w", grid.blocks.street_w}};
    j["scene"] = {{"tx_x", scene.tx_position.x},
                  {"tx_y", scene.tx_position.y},
                  {"tx_power_dbm", scene.tx_power_dbm},
                  {"tx_gain_dbi", scene.tx_gain_dbi},
                  {"rx_gain_dbi", scene.rx_gain_dbi},
                  {"sounding_amplitude_s", scene.sounding_amplitude_s},
                  {"carrier_ghz", scene.carrier_ghz},
                  {"sampling_freq_hz", scene.sampling_freq_hz},
                  {"n_samples", scene.n_samples},
                  {"noise_sigma_db", scene.noise_sigma_db},
                  {"threshold_eta_db", scene.threshold_eta_db},
                  {"path_loss_exponent", scene.path_loss_exponent},
                  {"path_loss_exponent_nlos", scene.path_loss_exponent_nlos},
                  {"reflection_loss_db", scene.reflection_loss_db}};
    j["codebook"] = {{"num_beams", codebook.num_beams},
                     {"beamwidth_sigma", codebook.beamwidth_sigma}};
    j["profile"] = {{"kind", traj::kind_name(profile.kind)},
                    {"avg_speed", profile.avg_speed},
                    {"speed_sigma", profile.speed_sigma},
                    {"turn_prob", profile.turn_prob},
                    {"stop_prob", profile.stop_prob},
                    {"max_turn", profile.max_turn},
                    {"sample_rate_hz", profile.sample_rate_hz}};
    j["model"] = model.to_json();
    j["train"] = {{"epochs", train.epochs},
                  {"batch_size", train.batch_size},
                  {"lr", train.lr},
                  {"patience", train.patience},
                  {"lr_patience", train.lr_patience}};
    j["planner"] = {{"step_size", planner.step_size},
                    {"goal_tolerance", planner.goal_tolerance},
                    {"max_iterations", planner.max_iterations},
                    {"neighbor_radius", planner.neighbor_radius}};
    return j;
  }

  std::uint64_t digest() const {
    const std::string s = to_json().dump();
    return fnv1a64(s.data(), s.size());
  }

  static void require_keys(const json& j, const std::set<std::string>& allowed,
                           const std::string& where) {
    if (!j.is_object()) throw config_error("config: " + where + " must be an object");
    for (const auto& [k, v] : j.items())
      if (!allowed.count(k))
        throw config_error("config: unknown key '" + k + "' in " + where);
  }

  template <typename T>
  static void opt(const json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
  }

  void apply(const json& j) {
    require_keys(j, {"version", "seed", "workers", "grid", "scene", "codebook", "profile",
                     "model", "train", "planner"},
                 "top level");
    if (j.contains("version") && j.at("version").get<int>() != 1)
      throw config_error("config: unsupported version");
    opt(j, "seed", seed);
    opt(j, "workers", workers);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      require_keys(g, {"width_cells", "height_cells", "cell_size", "block_w", "block_h",
                       "street_w"},
                   "grid");
      opt(g, "width_cells", grid.width_cells);
      opt(g, "height_cells", grid.height_cells);
      opt(g, "cell_size", grid.cell_size);
      opt(g, "block_w", grid.blocks.block_w);
      opt(g, "block_h", grid.blocks.block_h);
      opt(g, "street_w", grid.blocks.street_w);
    }
    if (j.contains("scene")) {
      const auto& s = j.at("scene");
      require_keys(s,
                   {"tx_x", "tx_y", "tx_power_dbm", "tx_gain_dbi", "rx_gain_dbi",
                    "sounding_amplitude_s", "carrier_ghz", "sampling_freq_hz", "n_samples",
                    "noise_sigma_db", "threshold_eta_db", "path_loss_exponent",
                    "path_loss_exponent_nlos", "reflection_loss_db"},
                   "scene");
      opt(s, "tx_x", scene.tx_position.x);
      opt(s, "tx_y", scene.tx_position.y);
      opt(s, "tx_power_dbm", scene.tx_power_dbm);
      opt(s, "tx_gain_dbi", scene.tx_gain_dbi);
      opt(s, "rx_gain_dbi", scene.rx_gain_dbi);
      opt(s, "sounding_amplitude_s", scene.sounding_amplitude_s);
      opt(s, "carrier_ghz", scene.carrier_ghz);
      opt(s, "sampling_freq_hz", scene.sampling_freq_hz);
      opt(s, "n_samples", scene.n_samples);
      opt(s, "noise_sigma_db", scene.noise_sigma_db);
      opt(s, "threshold_eta_db", scene.threshold_eta_db);
      opt(s, "path_loss_exponent", scene.path_loss_exponent);
      opt(s, "path_loss_exponent_nlos", scene.path_loss_exponent_nlos);
      opt(s, "reflection_loss_db", scene.reflection_loss_db);
      scene.validate();
    }
    if (j.contains("codebook")) {
      const auto& c = j.at("codebook");
      require_keys(c, {"num_beams", "beamwidth_sigma"}, "codebook");
      int m = codebook.num_beams;
      double sigma = codebook.beamwidth_sigma;
      opt(c, "num_beams", m);
      opt(c, "beamwidth_sigma", sigma);
      codebook = fp::BeamCodebook::uniform(m, sigma);
    }
    if (j.contains("profile")) {
      const auto& p = j.at("profile");
      require_keys(p,
                   {"kind", "avg_speed", "speed_sigma", "turn_prob", "stop_prob", "max_turn",
                    "sample_rate_hz"},
                   "profile");
      if (p.contains("kind")) {
        const std::string k = p.at("kind");
        if (k == "pedestrian")
          profile = traj::MotionProfile::pedestrian();
        else if (k == "vehicle")
          profile = traj::MotionProfile::vehicle();
        else if (k == "hybrid")
          profile = traj::MotionProfile::hybrid();
        else
          throw config_error("config: unknown profile kind '" + k + "'");
      }
      opt(p, "avg_speed", profile.avg_speed);
      opt(p, "speed_sigma", profile.speed_sigma);
      opt(p, "turn_prob", profile.turn_prob);
      opt(p, "stop_prob", profile.stop_prob);
      opt(p, "max_turn", profile.max_turn);
      opt(p, "sample_rate_hz", profile.sample_rate_hz);
      profile.validate();
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      require_keys(m,
                   {"d_model", "heads", "enc_layers", "dec_layers", "d_ff", "dropout_p", "t_obs",
                    "horizon", "input_dim", "mode", "pe_width_tobs", "use_positional_encoding",
                    "coord"},
                   "model");
      opt(m, "d_model", model.d_model);
      opt(m, "heads", model.heads);
      opt(m, "enc_layers", model.enc_layers);
      opt(m, "dec_layers", model.dec_layers);
      opt(m, "d_ff", model.d_ff);
      opt(m, "dropout_p", model.dropout_p);
      opt(m, "pe_width_tobs", model.pe_width_tobs);
      opt(m, "use_positional_encoding", model.use_positional_encoding);
      if (m.contains("mode"))
        model.mode = m.at("mode") == "position" ? tn::InputMode::position : tn::InputMode::fingerprint;
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      require_keys(t, {"epochs", "batch_size", "lr", "patience", "lr_patience"}, "train");
      opt(t, "epochs", train.epochs);
      opt(t, "batch_size", train.batch_size);
      opt(t, "lr", train.lr);
      opt(t, "patience", train.patience);
      opt(t, "lr_patience", train.lr_patience);
    }
    if (j.contains("planner")) {
      const auto& p = j.at("planner");
      require_keys(p, {"step_size", "goal_tolerance", "max_iterations", "neighbor_radius"},
                   "planner");
      opt(p, "step_size", planner.step_size);
      opt(p, "goal_tolerance", planner.goal_tolerance);
      opt(p, "max_iterations", planner.max_iterations);
      opt(p, "neighbor_radius", planner.neighbor_radius);
      planner.validate();
    }
  }

  static RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config: " + path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw config_error(std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig c;
    c.apply(j);
    return c;
  }
};

}  // namespace bft::cli
