#include <catch2/catch_amalgamated.hpp>

#include "bft/transformer.hpp"
#include "oracles.hpp"

using namespace bft;
using namespace bft::tn;
using num::Tensor;
using Catch::Matchers::WithinAbs;

namespace {

Tensor rand_t(std::size_t r, std::size_t c, std::uint64_t seed, bool grad = false,
              double lo = -1.0, double hi = 1.0) {
  DetRng rng(seed);
  std::vector<double> v(r * c);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor::from_data(r, c, std::move(v), grad);
}

std::vector<std::vector<double>> to_rows(const Tensor& t) {
  std::vector<std::vector<double>> out(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) out[i][j] = t.at(i, j);
  return out;
}

TransformerConfig tiny_config() {
  TransformerConfig cfg;
  cfg.d_model = 8;
  cfg.heads = 2;
  cfg.enc_layers = 2;
  cfg.dec_layers = 2;
  cfg.d_ff = 16;
  cfg.dropout_p = 0.0;
  cfg.t_obs = 3;
  cfg.horizon = 2;
  cfg.input_dim = 12;
  cfg.coord = {0.0, 0.0, 1.0};
  return cfg;
}

traj::Trajectory synthetic_traj(const TransformerConfig& cfg, std::uint64_t seed) {
  traj::Trajectory t;
  t.id = seed;
  t.t_obs = cfg.t_obs;
  DetRng rng(seed);
  for (int l = 0; l < cfg.t_obs + cfg.horizon; ++l)
    t.positions.push_back({rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8)});
  if (cfg.mode == InputMode::fingerprint) {
    const int m = 4, ns = cfg.input_dim / 4;
    for (int l = 0; l < t.length(); ++l) {
      fp::Fingerprint f(m, ns, t.positions[l], l);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < ns; ++j)
          if (rng.uniform01() < 0.3) f.set(i, j, true);
      t.fingerprints.push_back(f);
    }
  }
  return t;
}

}  // namespace

TEST_CASE("attention basics") {
  SECTION("single key returns the single V row regardless of Q") {
    const auto q = rand_t(3, 4, 1);
    const auto k = rand_t(1, 4, 2);
    const auto v = rand_t(1, 5, 3);
    const auto y = attention(q, k, v, 4);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 5; ++j) REQUIRE_THAT(y.at(i, j), WithinAbs(v.at(0, j), 1e-15));
  }
  SECTION("all-zero scores average the V rows") {
    const auto q = Tensor::zeros(2, 4);
    const auto k = rand_t(3, 4, 4);
    const auto v = rand_t(3, 2, 5);
    const auto y = attention(q, k, v, 4);
    for (std::size_t j = 0; j < 2; ++j) {
      const double mean = (v.at(0, j) + v.at(1, j) + v.at(2, j)) / 3.0;
      REQUIRE_THAT(y.at(0, j), WithinAbs(mean, 1e-12));
      REQUIRE_THAT(y.at(1, j), WithinAbs(mean, 1e-12));
    }
  }
  SECTION("2x2 case matches the scalar oracle to 1e-12") {
    const auto q = Tensor::from_data(2, 2, {1.5, 0.0, 0.0, 1.5});
    const auto k = Tensor::from_data(2, 2, {1.5, 0.0, 0.0, 1.5});
    const auto v = Tensor::from_data(2, 2, {0.3, -0.7, 1.1, 0.4});
    const auto y = attention(q, k, v, 2);
    const auto want = oracle::scalar_attention(to_rows(q), to_rows(k), to_rows(v), 2.0);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) REQUIRE_THAT(y.at(i, j), WithinAbs(want[i][j], 1e-12));
  }
  SECTION("output rows are convex combinations of V rows") {
    const auto q = rand_t(5, 6, 6, false, -2, 2);
    const auto k = rand_t(7, 6, 7, false, -2, 2);
    const auto v = rand_t(7, 3, 8, false, -3, 3);
    const auto y = attention(q, k, v, 6);
    for (std::size_t j = 0; j < v.cols(); ++j) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t i = 0; i < v.rows(); ++i) {
        lo = std::min(lo, v.at(i, j));
        hi = std::max(hi, v.at(i, j));
      }
      for (std::size_t i = 0; i < y.rows(); ++i) {
        REQUIRE(y.at(i, j) >= lo - 1e-12);
        REQUIRE(y.at(i, j) <= hi + 1e-12);
      }
    }
  }
}

TEST_CASE("multi_head composition") {
  SECTION("h=1 with identity projections reduces to attention") {
    const int d = 4;
    AttnParams p;
    std::vector<double> eye(d * d, 0.0);
    for (int i = 0; i < d; ++i) eye[i * d + i] = 1.0;
    p.wq.push_back(Tensor::from_data(d, d, eye));
    p.wk.push_back(Tensor::from_data(d, d, eye));
    p.wv.push_back(Tensor::from_data(d, d, eye));
    p.wo = Tensor::from_data(d, d, eye);
    const auto q = rand_t(3, d, 9), k = rand_t(5, d, 10), v = rand_t(5, d, 11);
    const auto got = multi_head(q, k, v, p, 1, d);
    const auto want = attention(q, k, v, d);
    for (std::size_t i = 0; i < got.size(); ++i)
      REQUIRE_THAT(got.data()[i], WithinAbs(want.data()[i], 1e-14));
  }
  SECTION("all-zero projections produce all-zero output") {
    const int d_model = 6, d_head = 3;
    AttnParams p;
    for (int i = 0; i < 2; ++i) {
      p.wq.push_back(Tensor::zeros(d_model, d_head));
      p.wk.push_back(Tensor::zeros(d_model, d_head));
      p.wv.push_back(Tensor::zeros(d_model, d_head));
    }
    p.wo = Tensor::zeros(2 * d_head, d_model);
    const auto x = rand_t(4, d_model, 12);
    const auto y = multi_head(x, x, x, p, 2, d_head);
    for (double v2 : y.data()) REQUIRE(v2 == 0.0);
  }
  SECTION("h=2 seeded weights match a per-head scalar oracle to 1e-10") {
    const int d_model = 6, d_head = 3, h = 2;
    AttnParams p;
    for (int i = 0; i < h; ++i) {
      p.wq.push_back(rand_t(d_model, d_head, 100 + i));
      p.wk.push_back(rand_t(d_model, d_head, 200 + i));
      p.wv.push_back(rand_t(d_model, d_head, 300 + i));
    }
    p.wo = rand_t(h * d_head, d_model, 400);
    const auto q = rand_t(3, d_model, 13), k = rand_t(3, d_model, 14), v = rand_t(3, d_model, 15);
    const auto got = multi_head(q, k, v, p, h, d_head);

    // oracle: project with plain loops, per-head scalar attention, concat, project
    auto mm = [](const std::vector<std::vector<double>>& a, const Tensor& w) {
      std::vector<std::vector<double>> out(a.size(), std::vector<double>(w.cols(), 0.0));
      for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t p2 = 0; p2 < a[0].size(); ++p2)
          for (std::size_t j = 0; j < w.cols(); ++j) out[i][j] += a[i][p2] * w.at(p2, j);
      return out;
    };
    std::vector<std::vector<double>> concat(3, std::vector<double>(h * d_head));
    for (int i = 0; i < h; ++i) {
      const auto hi = oracle::scalar_attention(mm(to_rows(q), p.wq[i]), mm(to_rows(k), p.wk[i]),
                                               mm(to_rows(v), p.wv[i]), d_head);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < d_head; ++c) concat[r][i * d_head + c] = hi[r][c];
    }
    const auto want = mm(concat, p.wo);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < static_cast<std::size_t>(d_model); ++j)
        REQUIRE_THAT(got.at(i, j), WithinAbs(want[i][j], 1e-10));
  }
}

TEST_CASE("positional encoding values") {
  REQUIRE(positional_encoding(0, 0, 4) == 0.0);   // sin(0)
  REQUIRE(positional_encoding(0, 2, 8) == 0.0);
  REQUIRE(positional_encoding(0, 1, 4) == 1.0);   // cos(0)
  REQUIRE(positional_encoding(0, 3, 8) == 1.0);
  REQUIRE_THAT(positional_encoding(1, 0, 4), WithinAbs(std::sin(1.0), 1e-15));
  REQUIRE_THAT(positional_encoding(1, 0, 4), WithinAbs(0.841470985, 1e-9));

  // high-precision spot checks of the even/odd branches
  for (int pos : {1, 2, 5}) {
    for (int j : {0, 1, 2, 3, 6, 7}) {
      for (int width : {4, 8, 64}) {
        const long double base = j % 2 == 0 ? j : j - 1;
        const long double freq = powl(10000.0L, 2.0L * base / width);
        const long double want = j % 2 == 0 ? sinl(pos / freq) : cosl(pos / freq);
        REQUIRE_THAT(positional_encoding(pos, j, width),
                     WithinAbs(static_cast<double>(want), 1e-12));
      }
    }
  }
}

TEST_CASE("encoder behaviors") {
  TransformerConfig cfg = tiny_config();
  const auto params = ModelParams::init(cfg, 7);

  SECTION("T_obs = 1 yields one latent row") {
    TransformerConfig c1 = cfg;
    c1.t_obs = 1;
    const auto p1 = ModelParams::init(c1, 7);
    detail::RngCursor rng{0};
    const auto z = encode(rand_t(1, c1.input_dim, 21), p1, c1, false, rng);
    REQUIRE(z.rows() == 1);
    REQUIRE(z.cols() == static_cast<std::size_t>(c1.d_model));
  }

  SECTION("eval mode is deterministic") {
    const auto x = rand_t(cfg.t_obs, cfg.input_dim, 22);
    detail::RngCursor r1{1}, r2{2};
    const auto z1 = encode(x, params, cfg, false, r1);
    const auto z2 = encode(x, params, cfg, false, r2);
    REQUIRE(z1.data() == z2.data());
  }

  SECTION("zero input equals a zeroed-embedding forward on any input") {
    detail::RngCursor r1{0};
    const auto z_zero = encode(Tensor::zeros(cfg.t_obs, cfg.input_dim), params, cfg, false, r1);
    ModelParams zeroed = params.clone();
    for (auto& v : zeroed.enc_embed_w.data()) v = 0.0;
    detail::RngCursor r2{0};
    const auto z_any = encode(rand_t(cfg.t_obs, cfg.input_dim, 23), zeroed, cfg, false, r2);
    for (std::size_t i = 0; i < z_zero.size(); ++i)
      REQUIRE_THAT(z_zero.data()[i], WithinAbs(z_any.data()[i], 1e-12));
  }

  SECTION("length mismatch is rejected") {
    detail::RngCursor rng{0};
    REQUIRE_THROWS_AS(encode(rand_t(cfg.t_obs, cfg.input_dim + 1, 24), params, cfg, false, rng),
                      config_error);
  }
}

TEST_CASE("positional sensitivity and permutation equivariance") {
  TransformerConfig cfg = tiny_config();
  cfg.enc_layers = 1;
  const auto x = rand_t(cfg.t_obs, cfg.input_dim, 30, false, 0.0, 1.0);

  // swap rows 0 and 2
  auto perm = x.data();
  for (int j = 0; j < cfg.input_dim; ++j)
    std::swap(perm[j], perm[2 * cfg.input_dim + j]);
  const auto xp = Tensor::from_data(cfg.t_obs, cfg.input_dim, std::move(perm));

  SECTION("without positional encodings the encoder is permutation-equivariant") {
    TransformerConfig nope = cfg;
    nope.use_positional_encoding = false;
    const auto params = ModelParams::init(nope, 8);
    detail::RngCursor r1{0}, r2{0};
    const auto z = encode(x, params, nope, false, r1);
    const auto zp = encode(xp, params, nope, false, r2);
    for (int j = 0; j < cfg.d_model; ++j) {
      REQUIRE_THAT(zp.at(0, j), WithinAbs(z.at(2, j), 1e-10));
      REQUIRE_THAT(zp.at(2, j), WithinAbs(z.at(0, j), 1e-10));
      REQUIRE_THAT(zp.at(1, j), WithinAbs(z.at(1, j), 1e-10));
    }
  }

  SECTION("with positional encodings the permuted input maps differently") {
    const auto params = ModelParams::init(cfg, 8);
    detail::RngCursor r1{0}, r2{0};
    const auto z = encode(x, params, cfg, false, r1);
    const auto zp = encode(xp, params, cfg, false, r2);
    double diff = 0.0;
    for (int j = 0; j < cfg.d_model; ++j) diff += std::abs(zp.at(0, j) - z.at(2, j));
    REQUIRE(diff > 1e-6);
  }
}

TEST_CASE("decoder: causal mask and incremental equivalence") {
  TransformerConfig cfg = tiny_config();
  const auto params = ModelParams::init(cfg, 9);
  detail::RngCursor rng{0};
  const auto z = encode(rand_t(cfg.t_obs, cfg.input_dim, 40), params, cfg, false, rng);

  SECTION("perturbing a future decoder input leaves earlier outputs unchanged") {
    auto din = rand_t(3, 2, 41).data();
    detail::RngCursor r1{0};
    const auto y1 = decode(Tensor::from_data(3, 2, din), z, params, cfg, false, r1);
    din[4] += 0.5;  // token 2
    din[5] -= 0.25;
    detail::RngCursor r2{0};
    const auto y2 = decode(Tensor::from_data(3, 2, din), z, params, cfg, false, r2);
    for (int t = 0; t < 2; ++t)
      for (int j = 0; j < 2; ++j) REQUIRE_THAT(y2.at(t, j), WithinAbs(y1.at(t, j), 1e-12));
    double moved = std::abs(y2.at(2, 0) - y1.at(2, 0)) + std::abs(y2.at(2, 1) - y1.at(2, 1));
    REQUIRE(moved > 1e-9);
  }

  SECTION("3-step autoregression equals re-running the decoder from scratch") {
    TransformerConfig c3 = cfg;
    c3.horizon = 3;
    const auto pred = decode_autoregressive(z, params, c3, {0.1, -0.2});
    REQUIRE(pred.positions.size() == 3);

    // oracle: rebuild the input sequence and take the last row at each step
    std::vector<double> seq{0.1, -0.2};
    for (int k = 0; k < 3; ++k) {
      const int n = static_cast<int>(seq.size() / 2);
      detail::RngCursor r{0};
      const auto y = decode(Tensor::from_data(n, 2, seq), z, params, c3, false, r);
      const Vec2 next{y.at(n - 1, 0), y.at(n - 1, 1)};
      REQUIRE_THAT(pred.positions[k].x, WithinAbs(next.x, 1e-12));
      REQUIRE_THAT(pred.positions[k].y, WithinAbs(next.y, 1e-12));
      seq.push_back(next.x);
      seq.push_back(next.y);
    }
  }

  SECTION("horizon = 1 emits exactly one step") {
    TransformerConfig c1 = cfg;
    c1.horizon = 1;
    const auto pred = decode_autoregressive(z, params, c1, {0.0, 0.0});
    REQUIRE(pred.positions.size() == 1);
  }
}

TEST_CASE("full tiny transformer passes the gradient check at 1e-4") {
  TransformerConfig cfg = tiny_config();
  const auto t = synthetic_traj(cfg, 50);
  auto params = ModelParams::init(cfg, 10);
  const double err = num::grad_check(
      [&] { return forward_loss(t, params, cfg, false, 0); }, params.all(), 1e-5, 160, 99);
  REQUIRE(err < 1e-4);
}

TEST_CASE("constant velocity baseline") {
  SECTION("stationary prefix predicts the last position forever") {
    const std::vector<Vec2> obs{{3.0, 4.0}, {3.0, 4.0}, {3.0, 4.0}};
    const auto p = constant_velocity_baseline(obs, 4);
    for (const auto& q : p.positions) {
      REQUIRE(q.x == 3.0);
      REQUIRE(q.y == 4.0);
    }
  }
  SECTION("(0,0),(1,0) extrapolates to (2,0),(3,0),(4,0)") {
    const auto p = constant_velocity_baseline({{0, 0}, {1, 0}}, 3);
    REQUIRE(p.positions.size() == 3);
    for (int k = 0; k < 3; ++k) {
      REQUIRE_THAT(p.positions[k].x, WithinAbs(2.0 + k, 1e-15));
      REQUIRE(p.positions[k].y == 0.0);
    }
  }
  SECTION("overshoot on a right-angle turn grows as ||v|| * k") {
    // observed heads east at speed 2; the true path turns north at the corner
    const std::vector<Vec2> obs{{0, 0}, {2, 0}, {4, 0}};
    const auto p = constant_velocity_baseline(obs, 3);
    for (int k = 1; k <= 3; ++k) {
      const Vec2 truth{4.0, 2.0 * k};  // turned north
      const Vec2 got = p.positions[k - 1];
      const double err = dist(got, truth);
      REQUIRE_THAT(err, WithinAbs(2.0 * k * std::sqrt(2.0), 1e-12));
    }
  }
  SECTION("prefix shorter than 2 is rejected") {
    REQUIRE_THROWS_AS(constant_velocity_baseline({{0, 0}}, 2), config_error);
  }
}

TEST_CASE("training loop basics") {
  TransformerConfig cfg = tiny_config();
  cfg.mode = InputMode::position;
  cfg.input_dim = 2;

  traj::Corpus corpus;
  corpus.seed = 1;
  for (std::uint64_t s = 0; s < 4; ++s) corpus.trajectories.push_back(synthetic_traj(cfg, 60 + s));
  const auto ids = corpus.ids();

  SECTION("epochs = 0 returns initialized params and empty history") {
    TrainOptions opts;
    opts.epochs = 0;
    const auto res = train(corpus, {ids[0]}, {ids[1]}, cfg, opts);
    REQUIRE(res.history.empty());
    const auto fresh = ModelParams::init(cfg, opts.seed);
    REQUIRE(res.params.out_w.data() == fresh.out_w.data());
  }

  SECTION("fixed seed reproduces the loss history exactly") {
    TrainOptions opts;
    opts.epochs = 5;
    opts.batch_size = 2;
    opts.seed = 3;
    const auto a = train(corpus, {ids[0], ids[1], ids[2]}, {ids[3]}, cfg, opts);
    const auto b = train(corpus, {ids[0], ids[1], ids[2]}, {ids[3]}, cfg, opts);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
      REQUIRE(a.history[i].train_mse_m2 == b.history[i].train_mse_m2);
      REQUIRE(a.history[i].val_mse_m2 == b.history[i].val_mse_m2);
      REQUIRE(a.history[i].lr == b.history[i].lr);
    }
  }

  SECTION("unknown ids and empty splits are rejected") {
    TrainOptions opts;
    opts.epochs = 1;
    REQUIRE_THROWS_AS(train(corpus, {9999}, {ids[0]}, cfg, opts), config_error);
    REQUIRE_THROWS_AS(train(corpus, {}, {ids[0]}, cfg, opts), config_error);
  }
}

TEST_CASE("one stationary trajectory is memorized below 1e-3 m^2") {
  TransformerConfig cfg = tiny_config();
  cfg.mode = InputMode::position;
  cfg.input_dim = 2;
  cfg.coord = {0.0, 0.0, 10.0};

  traj::Trajectory t;
  t.id = 77;
  t.t_obs = cfg.t_obs;
  for (int l = 0; l < cfg.t_obs + cfg.horizon; ++l) t.positions.push_back({4.0, -3.0});
  traj::Corpus corpus;
  corpus.trajectories.push_back(t);

  TrainOptions opts;
  opts.epochs = 100;
  opts.batch_size = 1;
  opts.seed = 5;
  opts.lr = 2e-2;  // single sample = one Adam step per epoch; paper-default 1e-3 is far too slow here
  opts.patience = 100;
  opts.lr_patience = 50;
  const auto res = train(corpus, {77}, {77}, cfg, opts);
  REQUIRE_FALSE(res.history.empty());
  REQUIRE(res.best_val_mse_m2 < 1e-3);
}

TEST_CASE("model save/load round-trip preserves predictions") {
  TransformerConfig cfg = tiny_config();
  const auto t = synthetic_traj(cfg, 80);
  const auto params = ModelParams::init(cfg, 11);
  const auto want = predict(t, params, cfg);

  const std::string path = "test_model.bfnn";
  save_model(path, params, cfg);
  TransformerConfig cfg2;
  const auto loaded = load_model(path, &cfg2);
  REQUIRE(cfg2.d_model == cfg.d_model);
  REQUIRE(cfg2.input_dim == cfg.input_dim);
  const auto got = predict(t, loaded, cfg2);
  REQUIRE(got.positions.size() == want.positions.size());
  for (std::size_t i = 0; i < got.positions.size(); ++i) {
    REQUIRE(got.positions[i].x == want.positions[i].x);
    REQUIRE(got.positions[i].y == want.positions[i].y);
  }
  std::remove(path.c_str());
}

TEST_CASE("config validation") {
  TransformerConfig cfg = tiny_config();
  cfg.heads = 3;  // 8 % 3 != 0
  REQUIRE_THROWS_AS(cfg.validate(), config_error);
  cfg = tiny_config();
  cfg.horizon = 0;
  REQUIRE_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("positional encoding width switch follows the literal form") {
  TransformerConfig cfg = tiny_config();
  cfg.t_obs = 5;
  cfg.pe_width_tobs = true;
  const auto pe = pe_matrix(4, cfg);
  for (int pos = 0; pos < 4; ++pos)
    for (int j = 0; j < cfg.d_model; ++j)
      REQUIRE(pe.at(pos, j) == positional_encoding(pos, j, cfg.t_obs));
  cfg.pe_width_tobs = false;
  const auto pe2 = pe_matrix(4, cfg);
  for (int pos = 1; pos < 4; ++pos)
    for (int j = 0; j < cfg.d_model; ++j)
      REQUIRE(pe2.at(pos, j) == positional_encoding(pos, j, cfg.d_model));
}

TEST_CASE("train loss is non-increasing over the best-checkpoint sequence") {
  TransformerConfig cfg = tiny_config();
  cfg.mode = InputMode::position;
  cfg.input_dim = 2;
  cfg.coord = {0.0, 0.0, 10.0};

  traj::Corpus corpus;
  DetRng rng(8);
  for (std::uint64_t i = 0; i < 50; ++i) {
    traj::Trajectory t;
    t.id = i;
    t.t_obs = cfg.t_obs;
    Vec2 p{rng.uniform(-8, 8), rng.uniform(-8, 8)};
    const Vec2 v{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    for (int l = 0; l < cfg.t_obs + cfg.horizon; ++l) {
      t.positions.push_back(p);
      p = p + v;
    }
    corpus.trajectories.push_back(std::move(t));
  }
  std::vector<std::uint64_t> train_ids, val_ids;
  for (std::uint64_t i = 0; i < 40; ++i) train_ids.push_back(i);
  for (std::uint64_t i = 40; i < 50; ++i) val_ids.push_back(i);

  for (std::uint64_t seed : {4ull, 5ull, 6ull}) {
    TrainOptions opts;
    opts.epochs = 20;
    opts.batch_size = 16;
    opts.lr = 1e-3;
    opts.seed = seed;
    opts.patience = 40;
    opts.record_best_train_loss = true;
    const auto res = train(corpus, train_ids, val_ids, cfg, opts);

    // the tracked loss of the best-checkpoint sequence decreases strictly by
    // construction; verify the implementation honors it
    double prev_val = 1e300;
    int improvements = 0;
    for (const auto& row : res.history)
      if (row.val_mse_m2 < prev_val) {
        prev_val = row.val_mse_m2;
        ++improvements;
      }
    REQUIRE(improvements == static_cast<int>(res.best_train_sequence.size()));

    // each checkpoint's own train loss follows the same downward trend
    // (plain SGD jitter allows sub-percent upticks, hence the 5% slack)
    REQUIRE(res.best_train_sequence.size() >= 3);
    for (std::size_t i = 1; i < res.best_train_sequence.size(); ++i)
      REQUIRE(res.best_train_sequence[i].second <=
              res.best_train_sequence[i - 1].second * 1.05 + 1e-12);
    REQUIRE(res.best_train_sequence.back().second <
            0.9 * res.best_train_sequence.front().second);
  }
}
