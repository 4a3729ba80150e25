#pragma once
// Shared plumbing: error categories, deterministic hashing/RNG, small helpers.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace bft {

// Error categories; the CLI maps these onto exit codes.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct budget_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_mix(std::uint64_t h) { return splitmix64(h); }

template <typename... Rest>
std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v, Rest... rest) {
  return hash_mix(splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL)), rest...);
}

inline std::uint64_t bits_of(double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, sizeof u);
  return u;
}

// FNV-1a over raw bytes; used for file/content digests.
class Digest {
 public:
  void update(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= b[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void update_u32(std::uint32_t v) { update(&v, sizeof v); }
  void update_u64(std::uint64_t v) { update(&v, sizeof v); }
  void update_f64(double v) { update(&v, sizeof v); }
  void update_str(const std::string& s) {
    update_u64(s.size());
    update(s.data(), s.size());
  }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a64(const void* p, std::size_t n) {
  Digest d;
  d.update(p, n);
  return d.value();
}

// Counter-based deterministic RNG (splitmix stream). State is two words, so
// streams derived from (seed, index) tuples are cheap and order-independent.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) : seed_(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  std::uint64_t next_u64() { return splitmix64(seed_ ^ ctr_++ * 0x9e3779b97f4a7c15ULL); }

  // uniform in [0, 1)
  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // uniform integer in [0, n); n > 0
  std::uint64_t uniform_below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Box-Muller; one draw per call, cosine branch only, for a stable stream.
  double normal(double mean = 0.0, double sigma = 1.0) {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + sigma * z;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t ctr_ = 0;
};

// printf-based double formatting; locale-independent, reproducible.
inline std::string fmt_double(double v, int precision = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

// Chunked parallel map over [0, n). fn(i) must only touch slot i of its
// output; results are then independent of the worker count.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned k = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(k);
  for (unsigned w = 0; w < k; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += k) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline unsigned env_workers(unsigned flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* e = std::getenv("BFT_WORKERS")) {
    const long v = std::strtol(e, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

}  // namespace bft
