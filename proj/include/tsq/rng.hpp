#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace tsq {

/// mt19937_64 with hand-rolled bounded draws. The std distributions are
/// implementation-defined, which would break bit-reproducibility of sampling
/// across standard libraries; these are not.
class Rng {
public:
  static constexpr uint64_t kDefaultSeed = 2020;

  explicit Rng(uint64_t seed = kDefaultSeed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, n). Rejection sampling, no modulo bias.
  uint64_t below(uint64_t n) {
    if (n == 0) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  /// k distinct indices out of [0, n), in ascending order.
  std::vector<size_t> sample_indices(size_t n, size_t k) {
    if (k > n) k = n;
    // Floyd's algorithm, then sort to keep input order downstream.
    std::vector<size_t> picked;
    picked.reserve(k);
    std::vector<bool> in(n, false);
    for (size_t j = n - k; j < n; ++j) {
      size_t t = static_cast<size_t>(below(j + 1));
      if (in[t]) t = j;
      in[t] = true;
      picked.push_back(t);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace tsq
