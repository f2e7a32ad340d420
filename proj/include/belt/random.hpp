#pragma once

#include <cstdint>
#include <vector>

namespace belt {

// Deterministic, splittable random stream. All sampling in the project goes
// through this so that results depend only on the seed, never on call-site
// ordering across threads or on the standard library's distribution
// implementations.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : state_(seed), seed_(seed) {
    // warm up so that small seeds diverge immediately
    next_u64();
    next_u64();
  }

  uint64_t next_u64() {
    // splitmix64
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }

  size_t index(size_t n) { return static_cast<size_t>(next_u64() % n); }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  // Independent child stream; depends only on this stream's seed and the tag.
  RandomStream derive(uint64_t tag) const {
    uint64_t z = seed_ ^ (tag + 0x9e3779b97f4a7c15ULL + (seed_ << 6) + (seed_ >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return RandomStream(z ^ (z >> 31));
  }

  RandomStream derive(uint64_t a, uint64_t b) const { return derive(a).derive(b); }
  RandomStream derive(uint64_t a, uint64_t b, uint64_t c) const {
    return derive(a).derive(b).derive(c);
  }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t state_;
  uint64_t seed_;
};

}  // namespace belt
