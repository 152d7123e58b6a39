#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace eg {

// SplitMix64. Small, fast, and fully portable: identical streams on every
// platform, which the byte-identical rerun guarantees depend on.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

// Derive the seed of an independent child stream. Consumers key streams by
// purpose (cloud index, step index, ...) instead of drawing from one shared
// sequence, so results do not depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 g(seed ^ (stream * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL));
  g.next();
  return g.next();
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_.next(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return double(gen_.next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t x, r;
    do {
      x = gen_.next();
      r = x % n;
    } while (x - r > std::uint64_t(0) - n);
    return r;
  }

  // Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  SplitMix64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = std::size_t(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace eg
