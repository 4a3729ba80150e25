#include <catch2/catch_amalgamated.hpp>

#include <cstdio>

#include "bft/tensor.hpp"

using namespace bft;
using namespace bft::num;
using Catch::Matchers::WithinAbs;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, std::uint64_t seed, bool req_grad,
                     double lo = -1.0, double hi = 1.0) {
  DetRng rng(seed);
  std::vector<double> v(r * c);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor::from_data(r, c, std::move(v), req_grad);
}

}  // namespace

TEST_CASE("softmax_rows values") {
  SECTION("symmetry: [0,0] -> [0.5,0.5]") {
    const auto y = softmax_rows(Tensor::from_data(1, 2, {0.0, 0.0}));
    REQUIRE_THAT(y.data()[0], WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(y.data()[1], WithinAbs(0.5, 1e-15));
  }
  SECTION("[1,2,3] against a long-double evaluation") {
    const auto y = softmax_rows(Tensor::from_data(1, 3, {1.0, 2.0, 3.0}));
    long double e1 = expl(1.0L), e2 = expl(2.0L), e3 = expl(3.0L);
    long double z = e1 + e2 + e3;
    REQUIRE_THAT(y.data()[0], WithinAbs(static_cast<double>(e1 / z), 1e-12));
    REQUIRE_THAT(y.data()[1], WithinAbs(static_cast<double>(e2 / z), 1e-12));
    REQUIRE_THAT(y.data()[2], WithinAbs(static_cast<double>(e3 / z), 1e-12));
    REQUIRE_THAT(y.data()[0], WithinAbs(0.09003057, 1e-8));
    REQUIRE_THAT(y.data()[1], WithinAbs(0.24472847, 1e-8));
    REQUIRE_THAT(y.data()[2], WithinAbs(0.66524096, 1e-8));
  }
  SECTION("rows sum to 1 and are shift-invariant") {
    const auto x = random_tensor(6, 9, 31, false, -5.0, 5.0);
    const auto y = softmax_rows(x);
    for (std::size_t i = 0; i < y.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < y.cols(); ++j) s += y.at(i, j);
      REQUIRE_THAT(s, WithinAbs(1.0, 1e-12));
    }
    auto shifted = x.data();
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) shifted[i * x.cols() + j] += 7.25;
    const auto y2 = softmax_rows(Tensor::from_data(x.rows(), x.cols(), std::move(shifted)));
    for (std::size_t i = 0; i < y.size(); ++i)
      REQUIRE_THAT(y2.data()[i], WithinAbs(y.data()[i], 1e-12));
  }
}

TEST_CASE("elementwise op values") {
  const auto r = relu(Tensor::from_data(1, 2, {-2.0, 3.0}));
  REQUIRE(r.data()[0] == 0.0);
  REQUIRE(r.data()[1] == 3.0);

  const auto x = random_tensor(4, 5, 7, false);
  const auto d = dropout(x, 0.0, 1, true);
  REQUIRE(d.data() == x.data());

  REQUIRE(mse(x, x).value() == 0.0);
}

TEST_CASE("every differentiable op passes an isolated gradient check at 1e-6") {
  struct Case {
    const char* name;
    std::function<double()> run;
  };
  std::vector<Case> cases;

  cases.push_back({"matmul", [] {
    auto a = random_tensor(3, 4, 1, true);
    auto b = random_tensor(4, 5, 2, true);
    auto t = random_tensor(3, 5, 3, false);
    return grad_check([&] { return mse(matmul(a, b), t); }, {a, b}, 1e-5, 100, 1);
  }});
  cases.push_back({"add", [] {
    auto a = random_tensor(4, 4, 4, true);
    auto b = random_tensor(4, 4, 5, true);
    auto t = random_tensor(4, 4, 6, false);
    return grad_check([&] { return mse(add(a, b), t); }, {a, b}, 1e-5, 100, 2);
  }});
  cases.push_back({"transpose", [] {
    auto a = random_tensor(3, 6, 7, true);
    auto t = random_tensor(6, 3, 8, false);
    return grad_check([&] { return mse(transpose(a), t); }, {a}, 1e-5, 100, 3);
  }});
  cases.push_back({"relu", [] {
    auto a = random_tensor(4, 6, 9, true);
    for (auto& v : a.data())
      if (std::abs(v) < 1e-2) v += 0.1;  // keep clear of the kink
    auto t = random_tensor(4, 6, 10, false);
    return grad_check([&] { return mse(relu(a), t); }, {a}, 1e-5, 100, 4);
  }});
  cases.push_back({"softmax_rows", [] {
    auto a = random_tensor(4, 6, 11, true, -2.0, 2.0);
    auto t = random_tensor(4, 6, 12, false);
    return grad_check([&] { return mse(softmax_rows(a), t); }, {a}, 1e-5, 100, 5);
  }});
  cases.push_back({"dropout", [] {
    auto a = random_tensor(5, 5, 13, true);
    auto t = random_tensor(5, 5, 14, false);
    return grad_check([&] { return mse(dropout(a, 0.3, 99, true), t); }, {a}, 1e-5, 100, 6);
  }});
  cases.push_back({"layer_norm", [] {
    auto a = random_tensor(4, 8, 15, true, -2.0, 2.0);
    auto g = random_tensor(1, 8, 16, true, 0.5, 1.5);
    auto b = random_tensor(1, 8, 17, true, -0.5, 0.5);
    auto t = random_tensor(4, 8, 18, false);
    return grad_check([&] { return mse(layer_norm(a, g, b), t); }, {a, g, b}, 1e-5, 150, 7);
  }});
  cases.push_back({"embed_linear", [] {
    auto x = random_tensor(3, 7, 19, true);
    auto w = random_tensor(7, 4, 20, true);
    auto b = random_tensor(1, 4, 21, true);
    auto t = random_tensor(3, 4, 22, false);
    return grad_check([&] { return mse(embed_linear(x, w, b), t); }, {x, w, b}, 1e-5, 150, 8);
  }});
  cases.push_back({"mse", [] {
    auto p = random_tensor(4, 4, 23, true);
    auto t = random_tensor(4, 4, 24, true);
    return grad_check([&] { return mse(p, t); }, {p, t}, 1e-5, 100, 9);
  }});
  cases.push_back({"scale", [] {
    auto a = random_tensor(4, 4, 25, true);
    auto t = random_tensor(4, 4, 26, false);
    return grad_check([&] { return mse(scale(a, -1.7), t); }, {a}, 1e-5, 100, 10);
  }});
  cases.push_back({"concat_cols", [] {
    auto a = random_tensor(3, 2, 27, true);
    auto b = random_tensor(3, 5, 28, true);
    auto t = random_tensor(3, 7, 29, false);
    return grad_check([&] { return mse(concat_cols({a, b}), t); }, {a, b}, 1e-5, 100, 11);
  }});

  for (auto& c : cases) {
    const double err = c.run();
    INFO(c.name);
    REQUIRE(err < 1e-6);
  }
}

TEST_CASE("grad_check oracle behaviors") {
  SECTION("pure linear map with mse loss is exact to roundoff") {
    auto x = random_tensor(5, 6, 41, false);
    auto w = random_tensor(6, 3, 42, true);
    auto t = random_tensor(5, 3, 43, false);
    const double err = grad_check([&] { return mse(matmul(x, w), t); }, {w}, 1e-5, 100, 12);
    REQUIRE(err < 1e-8);
  }
  SECTION("constant function has exactly zero gradients") {
    auto unused = random_tensor(3, 3, 44, true);
    const double err =
        grad_check([&] { return Tensor::scalar(4.5); }, {unused}, 1e-5, 50, 13);
    REQUIRE(err == 0.0);
  }
  SECTION("epsilon bounds are enforced") {
    auto p = random_tensor(2, 2, 45, true);
    REQUIRE_THROWS_AS(grad_check([&] { return mse(p, p); }, {p}, 1e-8, 10, 1), config_error);
  }
}

TEST_CASE("layer_norm statistics before affine") {
  const auto x = random_tensor(8, 32, 50, false, -3.0, 3.0);
  auto gamma = Tensor::from_data(1, 32, std::vector<double>(32, 1.0));
  auto beta = Tensor::zeros(1, 32);
  const auto y = layer_norm(x, gamma, beta);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < y.cols(); ++j) mu += y.at(i, j);
    mu /= y.cols();
    double var = 0.0;
    for (std::size_t j = 0; j < y.cols(); ++j) var += (y.at(i, j) - mu) * (y.at(i, j) - mu);
    var /= y.cols();
    REQUIRE_THAT(mu, WithinAbs(0.0, 1e-10));
    REQUIRE_THAT(var, WithinAbs(1.0, 1e-8));
  }
}

TEST_CASE("dropout: determinism and kept fraction") {
  const auto x = Tensor::from_data(250, 400, std::vector<double>(100000, 1.0));
  const double p = 0.25;
  const auto a = dropout(x, p, 777, true);
  const auto b = dropout(x, p, 777, true);
  REQUIRE(a.data() == b.data());

  std::size_t kept = 0;
  for (double v : a.data()) kept += v != 0.0;
  const double n = 100000.0;
  const double sigma = std::sqrt(n * p * (1 - p));
  REQUIRE(std::abs(kept - n * (1 - p)) <= 3.0 * sigma);

  // eval mode is the identity
  const auto e = dropout(x, p, 777, false);
  REQUIRE(e.data() == x.data());
}

TEST_CASE("adam_step behaviors") {
  SECTION("first step moves by ~lr against the gradient sign") {
    auto theta = Tensor::from_data(1, 1, {2.0}, true);
    theta.grad()[0] = 3.0;
    std::vector<Tensor> params{theta};
    AdamState st;
    st.init(params);
    adam_step(params, st);
    REQUIRE_THAT(theta.data()[0], WithinAbs(2.0 - 1e-3, 1e-8));
    REQUIRE(st.t == 1);
  }
  SECTION("zero gradient leaves parameters unchanged, advances t") {
    auto theta = Tensor::from_data(1, 2, {1.0, -4.0}, true);
    theta.zero_grad();
    std::vector<Tensor> params{theta};
    AdamState st;
    st.init(params);
    adam_step(params, st);
    REQUIRE(theta.data()[0] == 1.0);
    REQUIRE(theta.data()[1] == -4.0);
    REQUIRE(st.t == 1);
  }
  SECTION("50 steps on f(theta)=theta^2 from 1: |theta| strictly decreasing") {
    auto theta = Tensor::from_data(1, 1, {1.0}, true);
    std::vector<Tensor> params{theta};
    AdamState st;
    st.init(params);
    double prev = 1.0;
    for (int s = 0; s < 50; ++s) {
      theta.zero_grad();
      theta.grad()[0] = 2.0 * theta.data()[0];
      adam_step(params, st);
      REQUIRE(std::abs(theta.data()[0]) < std::abs(prev));
      prev = theta.data()[0];
    }
  }
}

TEST_CASE("checkpoint round-trip is bit exact") {
  std::vector<std::pair<std::string, Tensor>> named;
  named.emplace_back("w1", random_tensor(7, 5, 60, true));
  named.emplace_back("b1", random_tensor(1, 5, 61, true));
  const std::string cfg = "{\"d_model\":64}";
  const std::string path = "test_ckpt.bfnn";
  save_checkpoint(path, named, cfg);
  std::string cfg_back;
  const auto loaded = load_checkpoint(path, &cfg_back);
  REQUIRE(cfg_back == cfg);
  REQUIRE(loaded.size() == named.size());
  for (std::size_t i = 0; i < named.size(); ++i) {
    REQUIRE(loaded[i].first == named[i].first);
    REQUIRE(loaded[i].second.data() == named[i].second.data());
  }
  std::remove(path.c_str());

  const std::string bad = "test_ckpt_bad.bfnn";
  {
    std::ofstream out(bad, std::ios::binary);
    out << "XXXXjunk";
  }
  REQUIRE_THROWS_AS(load_checkpoint(bad, nullptr), io_error);
  std::remove(bad.c_str());
}

TEST_CASE("shape mismatches raise parameter errors") {
  auto a = random_tensor(2, 3, 70, false);
  auto b = random_tensor(2, 3, 71, false);
  REQUIRE_THROWS_AS(matmul(a, b), config_error);
  REQUIRE_THROWS_AS(add(a, random_tensor(3, 2, 72, false)), config_error);
  REQUIRE_THROWS_AS(mse(a, random_tensor(3, 2, 73, false)), config_error);
  REQUIRE_THROWS_AS(dropout(a, 1.0, 1, true), config_error);
}
