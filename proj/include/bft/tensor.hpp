#pragma once
// Minimal dense 2-D tensor with reverse-mode differentiation, the handful of
// ops the transformer needs, finite-difference gradient checking, and Adam.
// 64-bit floats throughout.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "bft/common.hpp"

namespace bft::num {

struct TensorNode {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;
  std::vector<double> grad;  // allocated lazily on backward
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  std::size_t size() const { return rows * cols; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorNode> n) : n_(std::move(n)) {}

  static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false) {
    auto n = std::make_shared<TensorNode>();
    n->rows = rows;
    n->cols = cols;
    n->data.assign(rows * cols, 0.0);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  static Tensor from_data(std::size_t rows, std::size_t cols, std::vector<double> values,
                          bool requires_grad = false) {
    if (values.size() != rows * cols) throw config_error("tensor: data length != rows*cols");
    auto n = std::make_shared<TensorNode>();
    n->rows = rows;
    n->cols = cols;
    n->data = std::move(values);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
  }

  static Tensor scalar(double v) { return from_data(1, 1, {v}); }

  bool defined() const { return n_ != nullptr; }
  std::size_t rows() const { return n_->rows; }
  std::size_t cols() const { return n_->cols; }
  std::size_t size() const { return n_->size(); }
  bool requires_grad() const { return n_->requires_grad; }

  std::vector<double>& data() { return n_->data; }
  const std::vector<double>& data() const { return n_->data; }
  std::vector<double>& grad() {
    n_->ensure_grad();
    return n_->grad;
  }
  double value() const { return n_->data.at(0); }
  double at(std::size_t i, std::size_t j) const { return n_->at(i, j); }

  std::shared_ptr<TensorNode> node() const { return n_; }

  void zero_grad() { n_->grad.assign(n_->data.size(), 0.0); }

  bool all_finite() const {
    for (double v : n_->data)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::shared_ptr<TensorNode> n_;
};

namespace detail {

inline std::shared_ptr<TensorNode> make_node(std::size_t rows, std::size_t cols,
                                             std::vector<std::shared_ptr<TensorNode>> parents) {
  auto n = std::make_shared<TensorNode>();
  n->rows = rows;
  n->cols = cols;
  n->data.assign(rows * cols, 0.0);
  for (const auto& p : parents) n->requires_grad |= p->requires_grad;
  n->parents = std::move(parents);
  return n;
}

// C += A * B
inline void mm_nn(const double* A, const double* B, double* C, std::size_t m, std::size_t k,
                  std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double a = A[i * k + p];
      if (a == 0.0) continue;
      const double* brow = B + p * n;
      double* crow = C + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += a * brow[j];
    }
}

// C += A * B^T   (A: m x k, B: n x k, C: m x n)
inline void mm_nt(const double* A, const double* B, double* C, std::size_t m, std::size_t k,
                  std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double* arow = A + i * k;
      const double* brow = B + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      C[i * n + j] += s;
    }
}

// C += A^T * B   (A: m x k, B: m x n, C: k x n)
inline void mm_tn(const double* A, const double* B, double* C, std::size_t m, std::size_t k,
                  std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double a = A[i * k + p];
      if (a == 0.0) continue;
      const double* brow = B + i * n;
      double* crow = C + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += a * brow[j];
    }
}

}  // namespace detail

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) throw config_error("matmul: inner dimensions disagree");
  auto n = detail::make_node(a.rows(), b.cols(), {a.node(), b.node()});
  detail::mm_nn(a.data().data(), b.data().data(), n->data.data(), a.rows(), a.cols(), b.cols());
  if (n->requires_grad) {
    n->backward_fn = [](TensorNode& self) {
      auto& A = *self.parents[0];
      auto& B = *self.parents[1];
      if (A.requires_grad) {
        A.ensure_grad();
        detail::mm_nt(self.grad.data(), B.data.data(), A.grad.data(), A.rows, B.cols, A.cols);
      }
      if (B.requires_grad) {
        B.ensure_grad();
        detail::mm_tn(A.data.data(), self.grad.data(), B.grad.data(), A.rows, A.cols, B.cols);
      }
    };
  }
  return Tensor(n);
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw config_error("add: shape mismatch");
  auto n = detail::make_node(a.rows(), a.cols(), {a.node(), b.node()});
  for (std::size_t i = 0; i < n->size(); ++i) n->data[i] = a.data()[i] + b.data()[i];
  if (n->requires_grad) {
    n->backward_fn = [](TensorNode& self) {
      for (auto& p : self.parents) {
        if (!p->requires_grad) continue;
        p->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
      }
    };
  }
  return Tensor(n);
}

inline Tensor scale(const Tensor& a, double c) {
  auto n = detail::make_node(a.rows(), a.cols(), {a.node()});
  for (std::size_t i = 0; i < n->size(); ++i) n->data[i] = a.data()[i] * c;
  if (n->requires_grad) {
    n->backward_fn = [c](TensorNode& self) {
      auto& A = *self.parents[0];
      A.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) A.grad[i] += c * self.grad[i];
    };
  }
  return Tensor(n);
}

inline Tensor transpose(const Tensor& a) {
  auto n = detail::make_node(a.cols(), a.rows(), {a.node()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) n->data[j * a.rows() + i] = a.data()[i * a.cols() + j];
  if (n->requires_grad) {
    n->backward_fn = [](TensorNode& self) {
      auto& A = *self.parents[0];
      A.ensure_grad();
      for (std::size_t i = 0; i < self.rows; ++i)
        for (std::size_t j = 0; j < self.cols; ++j)
          A.grad[j * self.rows + i] += self.grad[i * self.cols + j];
    };
  }
  return Tensor(n);
}

inline Tensor relu(const Tensor& a) {
  auto n = detail::make_node(a.rows(), a.cols(), {a.node()});
  for (std::size_t i = 0; i < n->size(); ++i) n->data[i] = a.data()[i] > 0.0 ? a.data()[i] : 0.0;
  if (n->requires_grad) {
    n->backward_fn = [](TensorNode& self) {
      auto& A = *self.parents[0];
      A.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        if (A.data[i] > 0.0) A.grad[i] += self.grad[i];
    };
  }
  return Tensor(n);
}

// Row-wise softmax with max subtraction.
inline Tensor softmax_rows(const Tensor& a) {
  auto n = detail::make_node(a.rows(), a.cols(), {a.node()});
  const std::size_t R = a.rows(), C = a.cols();
  for (std::size_t i = 0; i < R; ++i) {
    const double* x = a.data().data() + i * C;
    double* y = n->data.data() + i * C;
    double mx = x[0];
    for (std::size_t j = 1; j < C; ++j) mx = std::max(mx, x[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < C; ++j) {
      y[j] = std::exp(x[j] - mx);
      z += y[j];
    }
    for (std::size_t j = 0; j < C; ++j) y[j] /= z;
  }
  if (n->requires_grad) {
    n->backward_fn = [](TensorNode& self) {
      auto& A = *self.parents[0];
      A.ensure_grad();
      const std::size_t R = self.rows, C = self.cols;
      for (std::size_t i = 0; i < R; ++i) {
        const double* y = self.data.data() + i * C;
        const double* dy = self.grad.data() + i * C;
        double dotv = 0.0;
        for (std::size_t j = 0; j < C; ++j) dotv += dy[j] * y[j];
        double* dx = A.grad.data() + i * C;
        for (std::size_t j = 0; j < C; ++j) dx[j] += y[j] * (dy[j] - dotv);
      }
    };
  }
  return Tensor(n);
}

// Inverted dropout: identity in eval mode or at p == 0.
inline Tensor dropout(const Tensor& a, double p, std::uint64_t seed, bool train_mode) {
  if (p < 0.0 || p >= 1.0) throw config_error("dropout: need 0 <= p < 1");
  if (!train_mode || p == 0.0) return a;
  auto n = detail::make_node(a.rows(), a.cols(), {a.node()});
  auto mask = std::make_shared<std::vector<std::uint8_t>>(a.size());
  DetRng rng(hash_mix(seed, 0x64726f70ULL));
  const double inv_keep = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < a.size(); ++i) {
    (*mask)[i] = rng.uniform01() >= p ? 1 : 0;
    n->data[i] = (*mask)[i] ? a.data()[i] * inv_keep : 0.0;
  }
  if (n->requires_grad) {
    n->backward_fn = [mask, inv_keep](TensorNode& self) {
      auto& A = *self.parents[0];
      A.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        if ((*mask)[i]) A.grad[i] += self.grad[i] * inv_keep;
    };
  }
  return Tensor(n);
}

// Row-wise layer normalization with affine gamma/beta (1 x cols each).
// Population variance; epsilon small enough that the normalized rows keep
// unit variance to ~1e-12 on well-scaled inputs.
inline constexpr double kLayerNormEps = 1e-12;

inline Tensor layer_norm(const Tensor& a, const Tensor& gamma, const Tensor& beta) {
  if (gamma.cols() != a.cols() || beta.cols() != a.cols() || gamma.rows() != 1 || beta.rows() != 1)
    throw config_error("layer_norm: gamma/beta must be 1 x cols");
  auto n = detail::make_node(a.rows(), a.cols(), {a.node(), gamma.node(), beta.node()});
  const std::size_t R = a.rows(), C = a.cols();
  auto cache = std::make_shared<std::vector<double>>(R * (C + 1));  // xhat rows + inv std
  for (std::size_t i = 0; i < R; ++i) {
    const double* x = a.data().data() + i * C;
    double mu = 0.0;
    for (std::size_t j = 0; j < C; ++j) mu += x[j];
    mu /= C;
    double var = 0.0;
    for (std::size_t j = 0; j < C; ++j) var += (x[j] - mu) * (x[j] - mu);
    var /= C;
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    (*cache)[R * C + i] = inv;
    double* xh = cache->data() + i * C;
    double* y = n->data.data() + i * C;
    for (std::size_t j = 0; j < C; ++j) {
      xh[j] = (x[j] - mu) * inv;
      y[j] = gamma.data()[j] * xh[j] + beta.data()[j];
    }
  }
  if (n->requires_grad) {
    n->backward_fn = [cache](TensorNode& self) {
      auto& A = *self.parents[0];
      auto& G = *self.parents[1];
      auto& B = *self.parents[2];
      const std::size_t R = self.rows, C = self.cols;
      if (G.requires_grad) G.ensure_grad();
      if (B.requires_grad) B.ensure_grad();
      if (A.requires_grad) A.ensure_grad();
      for (std::size_t i = 0; i < R; ++i) {
        const double* dy = self.grad.data() + i * C;
        const double* xh = cache->data() + i * C;
        const double inv = (*cache)[R * C + i];
        if (G.requires_grad)
          for (std::size_t j = 0; j < C; ++j) G.grad[j] += dy[j] * xh[j];
        if (B.requires_grad)
          for (std::size_t j = 0; j < C; ++j) B.grad[j] += dy[j];
        if (A.requires_grad) {
          double m1 = 0.0, m2 = 0.0;  // mean(dxh), mean(dxh * xh)
          for (std::size_t j = 0; j < C; ++j) {
            const double dxh = dy[j] * G.data[j];
            m1 += dxh;
            m2 += dxh * xh[j];
          }
          m1 /= C;
          m2 /= C;
          double* dx = A.grad.data() + i * C;
          for (std::size_t j = 0; j < C; ++j) {
            const double dxh = dy[j] * G.data[j];
            dx[j] += inv * (dxh - m1 - xh[j] * m2);
          }
        }
      }
    };
  }
  return Tensor(n);
}

// Y = X W + 1 b (bias row broadcast over rows).
inline Tensor embed_linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.cols() != w.rows()) throw config_error("embed_linear: inner dimensions disagree");
  if (b.rows() != 1 || b.cols() != w.cols()) throw config_error("embed_linear: bias must be 1 x out");
  auto n = detail::make_node(x.rows(), w.cols(), {x.node(), w.node(), b.node()});
  detail::mm_nn(x.data().data(), w.data().data(), n->data.data(), x.rows(), x.cols(), w.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) n->data[i * w.cols() + j] += b.data()[j];
  if (n->requires_grad) {
    n->backward_fn = [](TensorNode& self) {
      auto& X = *self.parents[0];
      auto& W = *self.parents[1];
      auto& B = *self.parents[2];
      if (X.requires_grad) {
        X.ensure_grad();
        detail::mm_nt(self.grad.data(), W.data.data(), X.grad.data(), X.rows, W.cols, X.cols);
      }
      if (W.requires_grad) {
        W.ensure_grad();
        detail::mm_tn(X.data.data(), self.grad.data(), W.grad.data(), X.rows, X.cols, W.cols);
      }
      if (B.requires_grad) {
        B.ensure_grad();
        for (std::size_t i = 0; i < X.rows; ++i)
          for (std::size_t j = 0; j < W.cols; ++j) B.grad[j] += self.grad[i * W.cols + j];
      }
    };
  }
  return Tensor(n);
}

// Mean squared error over all entries -> 1x1.
inline Tensor mse(const Tensor& pred, const Tensor& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw config_error("mse: shape mismatch");
  auto n = detail::make_node(1, 1, {pred.node(), target.node()});
  const std::size_t sz = pred.size();
  double s = 0.0;
  for (std::size_t i = 0; i < sz; ++i) {
    const double d = pred.data()[i] - target.data()[i];
    s += d * d;
  }
  n->data[0] = s / sz;
  if (n->requires_grad) {
    n->backward_fn = [](TensorNode& self) {
      auto& P = *self.parents[0];
      auto& T = *self.parents[1];
      const double g = self.grad[0] * 2.0 / P.data.size();
      if (P.requires_grad) {
        P.ensure_grad();
        for (std::size_t i = 0; i < P.data.size(); ++i) P.grad[i] += g * (P.data[i] - T.data[i]);
      }
      if (T.requires_grad) {
        T.ensure_grad();
        for (std::size_t i = 0; i < T.data.size(); ++i) T.grad[i] -= g * (P.data[i] - T.data[i]);
      }
    };
  }
  return Tensor(n);
}

inline Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw config_error("concat_cols: no inputs");
  const std::size_t R = parts[0].rows();
  std::size_t C = 0;
  std::vector<std::shared_ptr<TensorNode>> parents;
  for (const auto& p : parts) {
    if (p.rows() != R) throw config_error("concat_cols: row count mismatch");
    C += p.cols();
    parents.push_back(p.node());
  }
  auto n = detail::make_node(R, C, std::move(parents));
  std::size_t off = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < R; ++i)
      for (std::size_t j = 0; j < p.cols(); ++j)
        n->data[i * C + off + j] = p.data()[i * p.cols() + j];
    off += p.cols();
  }
  if (n->requires_grad) {
    n->backward_fn = [](TensorNode& self) {
      std::size_t off = 0;
      for (auto& p : self.parents) {
        if (p->requires_grad) {
          p->ensure_grad();
          for (std::size_t i = 0; i < p->rows; ++i)
            for (std::size_t j = 0; j < p->cols; ++j)
              p->grad[i * p->cols + j] += self.grad[i * self.cols + off + j];
        }
        off += p->cols;
      }
    };
  }
  return Tensor(n);
}

// Reverse-mode sweep from a scalar (or any) output; seeds with `seed_grad`.
inline void backward(const Tensor& out, double seed_grad = 1.0) {
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  std::vector<std::pair<TensorNode*, std::size_t>> stack{{out.node().get(), 0}};
  seen.insert(out.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorNode* p = node->parents[next++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  out.node()->ensure_grad();
  for (double& g : out.node()->grad) g = seed_grad;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* node = *it;
    if (node->backward_fn) {
      node->ensure_grad();
      node->backward_fn(*node);
    }
  }
}

// Central-difference check of reverse-mode gradients on a seeded subsample of
// coordinates. Returns the max relative error, with denominators floored at
// 1e-3 so near-zero gradients are compared absolutely.
inline double grad_check(const std::function<Tensor()>& f, std::vector<Tensor> params,
                         double epsilon = 1e-5, std::size_t min_coords = 100,
                         std::uint64_t seed = 0) {
  if (epsilon < 1e-7 || epsilon > 1e-3) throw config_error("grad_check: epsilon out of range");
  for (auto& p : params) p.zero_grad();
  Tensor loss = f();
  backward(loss);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) analytic.push_back(p.grad());

  std::size_t total = 0;
  for (const auto& p : params) total += p.size();
  DetRng rng(hash_mix(seed, 0x6763686bULL));
  double max_rel = 0.0;
  const std::size_t n_checks = std::min(total, std::max<std::size_t>(min_coords, 1));
  for (std::size_t c = 0; c < n_checks; ++c) {
    std::size_t flat = total <= n_checks ? c : rng.uniform_below(total);
    std::size_t pi = 0;
    while (flat >= params[pi].size()) {
      flat -= params[pi].size();
      ++pi;
    }
    double& slot = params[pi].data()[flat];
    const double keep = slot;
    slot = keep + epsilon;
    const double up = f().value();
    slot = keep - epsilon;
    const double dn = f().value();
    slot = keep;
    const double numeric = (up - dn) / (2.0 * epsilon);
    const double ana = analytic[pi][flat];
    const double rel = std::abs(ana - numeric) / std::max({std::abs(ana), std::abs(numeric), 1e-3});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  std::vector<std::vector<double>> m, v;

  void init(const std::vector<Tensor>& params) {
    m.clear();
    v.clear();
    for (const auto& p : params) {
      m.emplace_back(p.size(), 0.0);
      v.emplace_back(p.size(), 0.0);
    }
    t = 0;
  }
};

// Standard bias-corrected Adam update from each parameter's .grad().
inline void adam_step(std::vector<Tensor>& params, AdamState& state) {
  if (state.m.size() != params.size()) throw config_error("adam_step: state not initialized");
  ++state.t;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k].data();
    auto& g = params[k].grad();
    auto& m = state.m[k];
    auto& v = state.v[k];
    if (m.size() != p.size()) throw config_error("adam_step: shape drift");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double mh = m[i] / bc1;
      const double vh = v[i] / bc2;
      p[i] -= state.lr * mh / (std::sqrt(vh) + state.eps);
    }
  }
}

// ---- BFNN checkpoint format ----
// magic "BFNN", u32 version, u64 tensor count, u64 config length, config JSON
// bytes; per tensor: u32 name length, name, u32 rows, u32 cols, f64 payload.

inline void save_checkpoint(const std::string& path,
                            const std::vector<std::pair<std::string, Tensor>>& named,
                            const std::string& config_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for write: " + path);
  const char magic[4] = {'B', 'F', 'N', 'N'};
  out.write(magic, 4);
  const std::uint32_t version = 1;
  out.write(reinterpret_cast<const char*>(&version), 4);
  const std::uint64_t count = named.size(), clen = config_json.size();
  out.write(reinterpret_cast<const char*>(&count), 8);
  out.write(reinterpret_cast<const char*>(&clen), 8);
  out.write(config_json.data(), static_cast<std::streamsize>(clen));
  for (const auto& [name, t] : named) {
    const std::uint32_t nlen = name.size(), r = t.rows(), c = t.cols();
    out.write(reinterpret_cast<const char*>(&nlen), 4);
    out.write(name.data(), nlen);
    out.write(reinterpret_cast<const char*>(&r), 4);
    out.write(reinterpret_cast<const char*>(&c), 4);
    out.write(reinterpret_cast<const char*>(t.data().data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!out) throw io_error("write failed: " + path);
}

inline std::vector<std::pair<std::string, Tensor>> load_checkpoint(const std::string& path,
                                                                   std::string* config_json) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open for read: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "BFNN") throw io_error("bad magic (expected BFNN): " + path);
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  if (version != 1) throw io_error("unsupported BFNN version");
  std::uint64_t count = 0, clen = 0;
  in.read(reinterpret_cast<char*>(&count), 8);
  in.read(reinterpret_cast<char*>(&clen), 8);
  std::string cfg(clen, '\0');
  in.read(cfg.data(), static_cast<std::streamsize>(clen));
  if (config_json) *config_json = cfg;
  std::vector<std::pair<std::string, Tensor>> named;
  for (std::uint64_t k = 0; k < count; ++k) {
    std::uint32_t nlen = 0, r = 0, c = 0;
    in.read(reinterpret_cast<char*>(&nlen), 4);
    std::string name(nlen, '\0');
    in.read(name.data(), nlen);
    in.read(reinterpret_cast<char*>(&r), 4);
    in.read(reinterpret_cast<char*>(&c), 4);
    std::vector<double> values(static_cast<std::size_t>(r) * c);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw io_error("unexpected end of checkpoint: " + path);
    named.emplace_back(std::move(name), Tensor::from_data(r, c, std::move(values), true));
  }
  return named;
}

}  // namespace bft::num
