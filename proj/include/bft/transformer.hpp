#pragma once
// Encoder-decoder transformer for trajectory estimation from fingerprint (or
// position) sequences: multi-head attention, sinusoidal positional encoding,
// teacher-forced training with Adam + early stopping, autoregressive decoding,
// and the constant-velocity reference baseline.

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bft/common.hpp"
#include "bft/geometry.hpp"
#include "bft/tensor.hpp"
#include "bft/trajectory.hpp"

namespace bft::tn {

using num::Tensor;

enum class InputMode : std::uint8_t { fingerprint = 0, position = 1 };

// Affine map between world meters and the model's normalized coordinates.
struct CoordMap {
  double cx = 0.0, cy = 0.0, scale = 1.0;

  static CoordMap from_grid(const grid::OccupancyGrid& g) {
    CoordMap m;
    m.cx = 0.5 * g.width_m();
    m.cy = 0.5 * g.height_m();
    m.scale = 0.5 * std::max(g.width_m(), g.height_m());
    return m;
  }
  Vec2 normalize(const Vec2& p) const { return {(p.x - cx) / scale, (p.y - cy) / scale}; }
  Vec2 denormalize(const Vec2& q) const { return {q.x * scale + cx, q.y * scale + cy}; }
};

struct TransformerConfig {
  int d_model = 64;
  int heads = 2;
  int enc_layers = 2;
  int dec_layers = 2;
  int d_ff = 256;
  double dropout_p = 0.01;
  int t_obs = 7;
  int horizon = 3;
  int input_dim = 2048;  // M * N_s flattened fingerprint, or 2 in position mode
  InputMode mode = InputMode::fingerprint;
  bool pe_width_tobs = false;  // frequency width tied to the observation window instead of d_model
  bool use_positional_encoding = true;
  CoordMap coord;

  int d_head() const { return d_model / heads; }

  void validate() const {
    if (d_model < 1 || heads < 1 || enc_layers < 1 || dec_layers < 1 || d_ff < 1)
      throw config_error("transformer config: counts must be >= 1");
    if (d_model % heads != 0) throw config_error("transformer config: d_model must divide by heads");
    if (t_obs < 1 || horizon < 1) throw config_error("transformer config: t_obs and horizon >= 1");
    if (input_dim < 1) throw config_error("transformer config: input_dim must be >= 1");
    if (dropout_p < 0.0 || dropout_p >= 1.0) throw config_error("transformer config: dropout in [0,1)");
  }

  nlohmann::json to_json() const {
    return {{"d_model", d_model},     {"heads", heads},
            {"enc_layers", enc_layers}, {"dec_layers", dec_layers},
            {"d_ff", d_ff},           {"dropout_p", dropout_p},
            {"t_obs", t_obs},         {"horizon", horizon},
            {"input_dim", input_dim}, {"mode", mode == InputMode::fingerprint ? "fingerprint" : "position"},
            {"pe_width_tobs", pe_width_tobs},
            {"use_positional_encoding", use_positional_encoding},
            {"coord", {{"cx", coord.cx}, {"cy", coord.cy}, {"scale", coord.scale}}}};
  }

  static TransformerConfig from_json(const nlohmann::json& j) {
    TransformerConfig c;
    c.d_model = j.at("d_model");
    c.heads = j.at("heads");
    c.enc_layers = j.at("enc_layers");
    c.dec_layers = j.at("dec_layers");
    c.d_ff = j.at("d_ff");
    c.dropout_p = j.at("dropout_p");
    c.t_obs = j.at("t_obs");
    c.horizon = j.at("horizon");
    c.input_dim = j.at("input_dim");
    c.mode = j.at("mode") == "position" ? InputMode::position : InputMode::fingerprint;
    c.pe_width_tobs = j.at("pe_width_tobs");
    c.use_positional_encoding = j.at("use_positional_encoding");
    c.coord.cx = j.at("coord").at("cx");
    c.coord.cy = j.at("coord").at("cy");
    c.coord.scale = j.at("coord").at("scale");
    c.validate();
    return c;
  }
};

// Sinusoidal positional value: even j -> sin(pos / 10000^(2j/width)),
// odd j -> cos(pos / 10000^(2(j-1)/width)).
inline double positional_encoding(int pos, int j, int width) {
  const int base = j % 2 == 0 ? j : j - 1;
  const double freq = std::pow(10000.0, 2.0 * base / width);
  return j % 2 == 0 ? std::sin(pos / freq) : std::cos(pos / freq);
}

inline Tensor pe_matrix(int n_tokens, const TransformerConfig& cfg) {
  const int width = cfg.pe_width_tobs ? cfg.t_obs : cfg.d_model;
  std::vector<double> v(static_cast<std::size_t>(n_tokens) * cfg.d_model);
  for (int pos = 0; pos < n_tokens; ++pos)
    for (int j = 0; j < cfg.d_model; ++j)
      v[static_cast<std::size_t>(pos) * cfg.d_model + j] =
          cfg.use_positional_encoding ? positional_encoding(pos, j, width) : 0.0;
  return Tensor::from_data(n_tokens, cfg.d_model, std::move(v));
}

// softmax(Q K^T / sqrt(d)) V, with an optional additive mask on the scores.
inline Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, int d,
                        const Tensor* mask = nullptr) {
  if (q.cols() != k.cols() || k.rows() != v.rows())
    throw config_error("attention: shape mismatch");
  Tensor scores = num::scale(num::matmul(q, num::transpose(k)), 1.0 / std::sqrt(static_cast<double>(d)));
  if (mask) scores = num::add(scores, *mask);
  return num::matmul(num::softmax_rows(scores), v);
}

struct AttnParams {
  std::vector<Tensor> wq, wk, wv;  // per head: d_model x d_head
  Tensor wo;                       // (heads * d_head) x d_model
};

struct FfnParams {
  Tensor w1, b1, w2, b2;
};

struct LnParams {
  Tensor g, b;
};

struct EncLayerParams {
  AttnParams attn;
  LnParams ln1;
  FfnParams ffn;
  LnParams ln2;
};

struct DecLayerParams {
  AttnParams self_attn;
  LnParams ln1;
  AttnParams cross;
  LnParams ln2;
  FfnParams ffn;
  LnParams ln3;
};

inline Tensor multi_head(const Tensor& q, const Tensor& k, const Tensor& v, const AttnParams& p,
                         int heads, int d_head, const Tensor* mask = nullptr) {
  if (static_cast<int>(p.wq.size()) != heads) throw config_error("multi_head: head count mismatch");
  std::vector<Tensor> outs;
  outs.reserve(heads);
  for (int i = 0; i < heads; ++i)
    outs.push_back(attention(num::matmul(q, p.wq[i]), num::matmul(k, p.wk[i]),
                             num::matmul(v, p.wv[i]), d_head, mask));
  return num::matmul(num::concat_cols(outs), p.wo);
}

struct ModelParams {
  Tensor enc_embed_w, enc_embed_b;
  Tensor dec_embed_w, dec_embed_b;  // alias the encoder embedding when input_dim == 2
  bool shared_embedding = false;
  std::vector<EncLayerParams> enc;
  std::vector<DecLayerParams> dec;
  Tensor out_w, out_b;

  static ModelParams init(const TransformerConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::uint64_t ctr = 0;
    auto xavier = [&](std::size_t r, std::size_t c) {
      DetRng rng(hash_mix(seed, 0x696e6974ULL, ctr++));
      const double lim = std::sqrt(6.0 / (r + c));
      std::vector<double> v(r * c);
      for (auto& x : v) x = rng.uniform(-lim, lim);
      return Tensor::from_data(r, c, std::move(v), true);
    };
    auto zeros = [&](std::size_t r, std::size_t c) { return Tensor::zeros(r, c, true); };
    auto ones_row = [&](std::size_t c) {
      return Tensor::from_data(1, c, std::vector<double>(c, 1.0), true);
    };
    auto make_attn = [&](int heads, int d_model, int d_head) {
      AttnParams a;
      for (int i = 0; i < heads; ++i) {
        a.wq.push_back(xavier(d_model, d_head));
        a.wk.push_back(xavier(d_model, d_head));
        a.wv.push_back(xavier(d_model, d_head));
      }
      a.wo = xavier(static_cast<std::size_t>(heads) * d_head, d_model);
      return a;
    };
    auto make_ffn = [&](int d_model, int d_ff) {
      return FfnParams{xavier(d_model, d_ff), zeros(1, d_ff), xavier(d_ff, d_model),
                       zeros(1, d_model)};
    };
    auto make_ln = [&](int d_model) { return LnParams{ones_row(d_model), zeros(1, d_model)}; };

    ModelParams p;
    p.enc_embed_w = xavier(cfg.input_dim, cfg.d_model);
    p.enc_embed_b = zeros(1, cfg.d_model);
    p.shared_embedding = cfg.input_dim == 2;
    if (p.shared_embedding) {
      p.dec_embed_w = p.enc_embed_w;
      p.dec_embed_b = p.enc_embed_b;
    } else {
      p.dec_embed_w = xavier(2, cfg.d_model);
      p.dec_embed_b = zeros(1, cfg.d_model);
    }
    for (int l = 0; l < cfg.enc_layers; ++l)
      p.enc.push_back({make_attn(cfg.heads, cfg.d_model, cfg.d_head()), make_ln(cfg.d_model),
                       make_ffn(cfg.d_model, cfg.d_ff), make_ln(cfg.d_model)});
    for (int l = 0; l < cfg.dec_layers; ++l)
      p.dec.push_back({make_attn(cfg.heads, cfg.d_model, cfg.d_head()), make_ln(cfg.d_model),
                       make_attn(cfg.heads, cfg.d_model, cfg.d_head()), make_ln(cfg.d_model),
                       make_ffn(cfg.d_model, cfg.d_ff), make_ln(cfg.d_model)});
    p.out_w = xavier(cfg.d_model, 2);
    p.out_b = zeros(1, 2);
    return p;
  }

  std::vector<std::pair<std::string, Tensor>> named() const {
    std::vector<std::pair<std::string, Tensor>> out;
    auto push_attn = [&](const std::string& pre, const AttnParams& a) {
      for (std::size_t i = 0; i < a.wq.size(); ++i) {
        out.emplace_back(pre + ".wq" + std::to_string(i), a.wq[i]);
        out.emplace_back(pre + ".wk" + std::to_string(i), a.wk[i]);
        out.emplace_back(pre + ".wv" + std::to_string(i), a.wv[i]);
      }
      out.emplace_back(pre + ".wo", a.wo);
    };
    auto push_ffn = [&](const std::string& pre, const FfnParams& f) {
      out.emplace_back(pre + ".w1", f.w1);
      out.emplace_back(pre + ".b1", f.b1);
      out.emplace_back(pre + ".w2", f.w2);
      out.emplace_back(pre + ".b2", f.b2);
    };
    auto push_ln = [&](const std::string& pre, const LnParams& l) {
      out.emplace_back(pre + ".g", l.g);
      out.emplace_back(pre + ".b", l.b);
    };
    out.emplace_back("enc_embed_w", enc_embed_w);
    out.emplace_back("enc_embed_b", enc_embed_b);
    if (!shared_embedding) {
      out.emplace_back("dec_embed_w", dec_embed_w);
      out.emplace_back("dec_embed_b", dec_embed_b);
    }
    for (std::size_t l = 0; l < enc.size(); ++l) {
      const std::string pre = "enc" + std::to_string(l);
      push_attn(pre + ".self", enc[l].attn);
      push_ln(pre + ".ln1", enc[l].ln1);
      push_ffn(pre + ".ffn", enc[l].ffn);
      push_ln(pre + ".ln2", enc[l].ln2);
    }
    for (std::size_t l = 0; l < dec.size(); ++l) {
      const std::string pre = "dec" + std::to_string(l);
      push_attn(pre + ".self", dec[l].self_attn);
      push_ln(pre + ".ln1", dec[l].ln1);
      push_attn(pre + ".cross", dec[l].cross);
      push_ln(pre + ".ln2", dec[l].ln2);
      push_ffn(pre + ".ffn", dec[l].ffn);
      push_ln(pre + ".ln3", dec[l].ln3);
    }
    out.emplace_back("out_w", out_w);
    out.emplace_back("out_b", out_b);
    return out;
  }

  std::vector<Tensor> all() const {
    std::vector<Tensor> out;
    for (auto& [n, t] : named()) out.push_back(t);
    return out;
  }

  ModelParams clone() const {
    ModelParams c = *this;
    auto copy = [](Tensor& t) {
      t = Tensor::from_data(t.rows(), t.cols(), t.data(), true);
    };
    copy(c.enc_embed_w);
    copy(c.enc_embed_b);
    if (c.shared_embedding) {
      c.dec_embed_w = c.enc_embed_w;
      c.dec_embed_b = c.enc_embed_b;
    } else {
      copy(c.dec_embed_w);
      copy(c.dec_embed_b);
    }
    auto copy_attn = [&](AttnParams& a) {
      for (auto& t : a.wq) copy(t);
      for (auto& t : a.wk) copy(t);
      for (auto& t : a.wv) copy(t);
      copy(a.wo);
    };
    for (auto& l : c.enc) {
      copy_attn(l.attn);
      copy(l.ln1.g);
      copy(l.ln1.b);
      copy(l.ffn.w1);
      copy(l.ffn.b1);
      copy(l.ffn.w2);
      copy(l.ffn.b2);
      copy(l.ln2.g);
      copy(l.ln2.b);
    }
    for (auto& l : c.dec) {
      copy_attn(l.self_attn);
      copy(l.ln1.g);
      copy(l.ln1.b);
      copy_attn(l.cross);
      copy(l.ln2.g);
      copy(l.ln2.b);
      copy(l.ffn.w1);
      copy(l.ffn.b1);
      copy(l.ffn.w2);
      copy(l.ffn.b2);
      copy(l.ln3.g);
      copy(l.ln3.b);
    }
    copy(c.out_w);
    copy(c.out_b);
    return c;
  }

  static ModelParams from_named(const std::vector<std::pair<std::string, Tensor>>& named,
                                const TransformerConfig& cfg) {
    std::map<std::string, Tensor> lut(named.begin(), named.end());
    auto get = [&](const std::string& n) {
      auto it = lut.find(n);
      if (it == lut.end()) throw io_error("checkpoint missing tensor: " + n);
      return it->second;
    };
    ModelParams p;
    p.enc_embed_w = get("enc_embed_w");
    p.enc_embed_b = get("enc_embed_b");
    p.shared_embedding = cfg.input_dim == 2;
    if (p.shared_embedding) {
      p.dec_embed_w = p.enc_embed_w;
      p.dec_embed_b = p.enc_embed_b;
    } else {
      p.dec_embed_w = get("dec_embed_w");
      p.dec_embed_b = get("dec_embed_b");
    }
    auto get_attn = [&](const std::string& pre) {
      AttnParams a;
      for (int i = 0; i < cfg.heads; ++i) {
        a.wq.push_back(get(pre + ".wq" + std::to_string(i)));
        a.wk.push_back(get(pre + ".wk" + std::to_string(i)));
        a.wv.push_back(get(pre + ".wv" + std::to_string(i)));
      }
      a.wo = get(pre + ".wo");
      return a;
    };
    auto get_ffn = [&](const std::string& pre) {
      return FfnParams{get(pre + ".w1"), get(pre + ".b1"), get(pre + ".w2"), get(pre + ".b2")};
    };
    auto get_ln = [&](const std::string& pre) { return LnParams{get(pre + ".g"), get(pre + ".b")}; };
    for (int l = 0; l < cfg.enc_layers; ++l) {
      const std::string pre = "enc" + std::to_string(l);
      p.enc.push_back({get_attn(pre + ".self"), get_ln(pre + ".ln1"), get_ffn(pre + ".ffn"),
                       get_ln(pre + ".ln2")});
    }
    for (int l = 0; l < cfg.dec_layers; ++l) {
      const std::string pre = "dec" + std::to_string(l);
      p.dec.push_back({get_attn(pre + ".self"), get_ln(pre + ".ln1"), get_attn(pre + ".cross"),
                       get_ln(pre + ".ln2"), get_ffn(pre + ".ffn"), get_ln(pre + ".ln3")});
    }
    p.out_w = get("out_w");
    p.out_b = get("out_b");
    return p;
  }
};

namespace detail {

// per-forward dropout seed stream
struct RngCursor {
  std::uint64_t base;
  std::uint64_t n = 0;
  std::uint64_t next() { return hash_mix(base, n++); }
};

inline Tensor ffn_forward(const Tensor& x, const FfnParams& p) {
  return num::embed_linear(num::relu(num::embed_linear(x, p.w1, p.b1)), p.w2, p.b2);
}

inline Tensor causal_mask(int n) {
  std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) m[static_cast<std::size_t>(i) * n + j] = -1e30;
  return Tensor::from_data(n, n, std::move(m));
}

}  // namespace detail

// Encoder stack: embed + positional encoding, then N_e layers of
// self-attention and feed-forward sub-layers with residual + layer norm.
inline Tensor encode(const Tensor& tokens, const ModelParams& p, const TransformerConfig& cfg,
                     bool train_mode, detail::RngCursor& rng) {
  if (static_cast<int>(tokens.cols()) != cfg.input_dim)
    throw config_error("encode: token width != input_dim");
  Tensor x = num::add(num::embed_linear(tokens, p.enc_embed_w, p.enc_embed_b),
                      pe_matrix(static_cast<int>(tokens.rows()), cfg));
  x = num::dropout(x, cfg.dropout_p, rng.next(), train_mode);
  for (const auto& layer : p.enc) {
    Tensor sa = multi_head(x, x, x, layer.attn, cfg.heads, cfg.d_head());
    x = num::layer_norm(num::add(x, num::dropout(sa, cfg.dropout_p, rng.next(), train_mode)),
                        layer.ln1.g, layer.ln1.b);
    Tensor ff = detail::ffn_forward(x, layer.ffn);
    x = num::layer_norm(num::add(x, num::dropout(ff, cfg.dropout_p, rng.next(), train_mode)),
                        layer.ln2.g, layer.ln2.b);
  }
  return x;
}

// Decoder stack over already-normalized 2-D input tokens; causal self-
// attention, cross-attention over Z, output head d_model -> 2.
inline Tensor decode(const Tensor& dec_in, const Tensor& z, const ModelParams& p,
                     const TransformerConfig& cfg, bool train_mode, detail::RngCursor& rng) {
  const int n = static_cast<int>(dec_in.rows());
  Tensor x = num::add(num::embed_linear(dec_in, p.dec_embed_w, p.dec_embed_b), pe_matrix(n, cfg));
  x = num::dropout(x, cfg.dropout_p, rng.next(), train_mode);
  const Tensor mask = detail::causal_mask(n);
  for (const auto& layer : p.dec) {
    Tensor sa = multi_head(x, x, x, layer.self_attn, cfg.heads, cfg.d_head(), &mask);
    x = num::layer_norm(num::add(x, num::dropout(sa, cfg.dropout_p, rng.next(), train_mode)),
                        layer.ln1.g, layer.ln1.b);
    Tensor ca = multi_head(x, z, z, layer.cross, cfg.heads, cfg.d_head());
    x = num::layer_norm(num::add(x, num::dropout(ca, cfg.dropout_p, rng.next(), train_mode)),
                        layer.ln2.g, layer.ln2.b);
    Tensor ff = detail::ffn_forward(x, layer.ffn);
    x = num::layer_norm(num::add(x, num::dropout(ff, cfg.dropout_p, rng.next(), train_mode)),
                        layer.ln3.g, layer.ln3.b);
  }
  return num::embed_linear(x, p.out_w, p.out_b);
}

// Observed-prefix tokens for the encoder.
inline Tensor encoder_tokens(const traj::Trajectory& t, const TransformerConfig& cfg) {
  if (t.t_obs < cfg.t_obs) throw config_error("encoder_tokens: trajectory prefix shorter than t_obs");
  if (cfg.mode == InputMode::fingerprint) {
    if (!t.has_fingerprints()) throw config_error("encoder_tokens: fingerprints not attached");
    std::vector<double> v(static_cast<std::size_t>(cfg.t_obs) * cfg.input_dim);
    for (int l = 0; l < cfg.t_obs; ++l) {
      const auto& f = t.fingerprints[l];
      if (f.beams() * f.samples() != cfg.input_dim)
        throw config_error("encoder_tokens: fingerprint size != input_dim");
      f.flatten_into(v.data() + static_cast<std::size_t>(l) * cfg.input_dim);
    }
    return Tensor::from_data(cfg.t_obs, cfg.input_dim, std::move(v));
  }
  std::vector<double> v(static_cast<std::size_t>(cfg.t_obs) * 2);
  for (int l = 0; l < cfg.t_obs; ++l) {
    const Vec2 q = cfg.coord.normalize(t.positions[l]);
    v[2 * l] = q.x;
    v[2 * l + 1] = q.y;
  }
  return Tensor::from_data(cfg.t_obs, 2, std::move(v));
}

// Teacher-forced loss in normalized coordinates: decoder inputs are the true
// positions y^(T_obs) .. y^(L-1), targets y^(T_obs+1) .. y^(L).
inline Tensor forward_loss(const traj::Trajectory& t, const ModelParams& p,
                           const TransformerConfig& cfg, bool train_mode, std::uint64_t rng_seed) {
  if (t.length() < cfg.t_obs + cfg.horizon)
    throw config_error("forward_loss: trajectory shorter than t_obs + horizon");
  detail::RngCursor rng{rng_seed};
  const Tensor z = encode(encoder_tokens(t, cfg), p, cfg, train_mode, rng);
  std::vector<double> din(static_cast<std::size_t>(cfg.horizon) * 2);
  std::vector<double> tgt(static_cast<std::size_t>(cfg.horizon) * 2);
  for (int k = 0; k < cfg.horizon; ++k) {
    const Vec2 a = cfg.coord.normalize(t.positions[cfg.t_obs - 1 + k]);
    const Vec2 b = cfg.coord.normalize(t.positions[cfg.t_obs + k]);
    din[2 * k] = a.x;
    din[2 * k + 1] = a.y;
    tgt[2 * k] = b.x;
    tgt[2 * k + 1] = b.y;
  }
  const Tensor out = decode(Tensor::from_data(cfg.horizon, 2, std::move(din)), z, p, cfg,
                            train_mode, rng);
  return num::mse(out, Tensor::from_data(cfg.horizon, 2, std::move(tgt)));
}

struct PredictedTrajectory {
  std::uint64_t trajectory_id = 0;
  std::vector<Vec2> positions;  // horizon positions, meters
};

// Free-running decode: start token is the last observed position; each step's
// 2-D output is appended to the decoder input sequence.
inline PredictedTrajectory decode_autoregressive(const Tensor& z, const ModelParams& p,
                                                 const TransformerConfig& cfg,
                                                 const Vec2& start_position_m,
                                                 std::uint64_t trajectory_id = 0) {
  PredictedTrajectory out;
  out.trajectory_id = trajectory_id;
  std::vector<double> seq;
  const Vec2 s = cfg.coord.normalize(start_position_m);
  seq.push_back(s.x);
  seq.push_back(s.y);
  detail::RngCursor rng{0};
  for (int k = 0; k < cfg.horizon; ++k) {
    const int n = static_cast<int>(seq.size() / 2);
    const Tensor y = decode(Tensor::from_data(n, 2, seq), z, p, cfg, false, rng);
    const Vec2 next{y.at(n - 1, 0), y.at(n - 1, 1)};
    out.positions.push_back(cfg.coord.denormalize(next));
    seq.push_back(next.x);
    seq.push_back(next.y);
  }
  return out;
}

inline PredictedTrajectory predict(const traj::Trajectory& t, const ModelParams& p,
                                   const TransformerConfig& cfg) {
  detail::RngCursor rng{0};
  const Tensor z = encode(encoder_tokens(t, cfg), p, cfg, false, rng);
  return decode_autoregressive(z, p, cfg, t.positions[cfg.t_obs - 1], t.id);
}

// v = y^(T_obs) - y^(T_obs - 1); prediction_k = y^(T_obs) + k v.
inline PredictedTrajectory constant_velocity_baseline(const std::vector<Vec2>& observed,
                                                      int horizon, std::uint64_t id = 0) {
  if (observed.size() < 2) throw config_error("constant_velocity_baseline: need T_obs >= 2");
  PredictedTrajectory out;
  out.trajectory_id = id;
  const Vec2 last = observed.back();
  const Vec2 v = last - observed[observed.size() - 2];
  for (int k = 1; k <= horizon; ++k) out.positions.push_back(last + v * static_cast<double>(k));
  return out;
}

struct TrainOptions {
  int epochs = 100;
  int batch_size = 64;
  std::uint64_t seed = 0;
  double lr = 1e-3;
  int patience = 10;      // early stop after this many stagnant epochs
  int lr_patience = 5;    // halve lr after this many stagnant epochs
  bool record_best_train_loss = false;  // fresh train-set eval at each new best
};

struct EpochRow {
  int epoch;
  double train_mse_m2;
  double val_mse_m2;
  double lr;
};

struct TrainResult {
  ModelParams params;  // best validation checkpoint
  std::vector<EpochRow> history;
  std::vector<std::pair<int, double>> best_train_sequence;  // (epoch, train mse m^2)
  int best_epoch = 0;
  double best_val_mse_m2 = 0.0;
};

// Teacher-forced MSE training with Adam, early stopping on validation loss,
// and lr halving on stagnation. Deterministic per seed.
inline TrainResult train(const traj::Corpus& corpus, const std::vector<std::uint64_t>& train_ids,
                         const std::vector<std::uint64_t>& val_ids, const TransformerConfig& cfg,
                         const TrainOptions& opts) {
  cfg.validate();
  if (opts.epochs < 0) throw config_error("train: epochs must be >= 0");
  std::map<std::uint64_t, const traj::Trajectory*> by_id;
  for (const auto& t : corpus.trajectories) by_id[t.id] = &t;
  auto resolve = [&](const std::vector<std::uint64_t>& ids) {
    std::vector<const traj::Trajectory*> out;
    out.reserve(ids.size());
    for (auto id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw config_error("train: id not in corpus");
      out.push_back(it->second);
    }
    return out;
  };

  TrainResult res;
  res.params = ModelParams::init(cfg, opts.seed);
  if (opts.epochs == 0) return res;

  const auto train_set = resolve(train_ids);
  const auto val_set = resolve(val_ids);
  if (train_set.empty() || val_set.empty()) throw config_error("train: empty train or val split");

  std::vector<Tensor> params = res.params.all();
  num::AdamState adam;
  adam.lr = opts.lr;
  adam.init(params);

  const double m2 = cfg.coord.scale * cfg.coord.scale;
  double best_val = std::numeric_limits<double>::infinity();
  ModelParams best = res.params.clone();
  int best_epoch = 0, stagnant = 0, lr_stagnant = 0;

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    DetRng shuffle_rng(hash_mix(opts.seed, 0x65706f6368ULL, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_below(i)]);

    double train_loss_sum = 0.0;
    std::size_t done = 0;
    while (done < order.size()) {
      const std::size_t take = std::min<std::size_t>(opts.batch_size, order.size() - done);
      for (auto& t : params) t.zero_grad();
      for (std::size_t b = 0; b < take; ++b) {
        const auto* item = train_set[order[done + b]];
        const std::uint64_t rng_seed =
            hash_mix(opts.seed, static_cast<std::uint64_t>(epoch), item->id);
        const Tensor loss = forward_loss(*item, res.params, cfg, true, rng_seed);
        if (!std::isfinite(loss.value()))
          throw numeric_error("train: non-finite loss at epoch " + std::to_string(epoch));
        train_loss_sum += loss.value();
        num::backward(loss, 1.0 / static_cast<double>(take));
      }
      adam_step(params, adam);
      done += take;
    }
    const double train_mse = train_loss_sum / static_cast<double>(train_set.size());

    double val_loss_sum = 0.0;
    for (const auto* item : val_set) {
      const Tensor loss = forward_loss(*item, res.params, cfg, false, 0);
      if (!std::isfinite(loss.value()))
        throw numeric_error("train: non-finite validation loss at epoch " + std::to_string(epoch));
      val_loss_sum += loss.value();
    }
    const double val_mse = val_loss_sum / static_cast<double>(val_set.size());
    res.history.push_back({epoch, train_mse * m2, val_mse * m2, adam.lr});

    if (val_mse < best_val - 1e-15) {
      best_val = val_mse;
      best = res.params.clone();
      best_epoch = epoch;
      stagnant = 0;
      lr_stagnant = 0;
      if (opts.record_best_train_loss) {
        double s = 0.0;
        for (const auto* item : train_set)
          s += forward_loss(*item, res.params, cfg, false, 0).value();
        res.best_train_sequence.emplace_back(epoch, s / train_set.size() * m2);
      }
    } else {
      ++stagnant;
      ++lr_stagnant;
      if (lr_stagnant >= opts.lr_patience) {
        adam.lr *= 0.5;
        lr_stagnant = 0;
      }
      if (stagnant >= opts.patience) break;
    }
  }

  res.params = std::move(best);
  res.best_epoch = best_epoch;
  res.best_val_mse_m2 = best_val * m2;
  return res;
}

inline void save_model(const std::string& path, const ModelParams& p,
                       const TransformerConfig& cfg) {
  num::save_checkpoint(path, p.named(), cfg.to_json().dump());
}

inline ModelParams load_model(const std::string& path, TransformerConfig* cfg_out) {
  std::string cfg_json;
  const auto named = num::load_checkpoint(path, &cfg_json);
  TransformerConfig cfg;
  try {
    cfg = TransformerConfig::from_json(nlohmann::json::parse(cfg_json));
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("model checkpoint has invalid config: ") + e.what());
  }
  if (cfg_out) *cfg_out = cfg;
  return ModelParams::from_named(named, cfg);
}

}  // namespace bft::tn
