#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace polymer {

// Counter-based PRNG built on the SplitMix64 finalizer. A stream is fully
// identified by its 64-bit key, and split() derives child streams from the
// key alone (not from the consumption state), so the stream tree of an
// experiment is a pure function of the root seed. That is what makes
// per-replica and per-site parallel sampling reproducible under any
// schedule.
class RngStream {
 public:
  explicit RngStream(uint64_t key) : key_(key), state_(key) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform on [0,1); 53 random bits, never returns 1
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on [a,b)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  // unbiased integer in {0,...,n-1}
  uint64_t uniform_below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
    const uint64_t threshold = (-n) % n;  // 2^64 mod n
    for (;;) {
      const uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // counting method, O(mean); fine at desk scale
  uint64_t poisson(double mean) {
    if (!(mean >= 0)) throw std::invalid_argument("poisson: mean must be >= 0");
    if (mean > 1e7) throw std::invalid_argument("poisson: mean too large for counting sampler");
    double acc = exponential(1.0);
    uint64_t k = 0;
    while (acc <= mean) {
      ++k;
      acc += exponential(1.0);
    }
    return k;
  }

  // independent child stream; depends only on (key, child)
  RngStream split(uint64_t child) const {
    uint64_t z = key_ ^ (0xd1b54a32d192ed03ULL * (child + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return RngStream(z);
  }

  uint64_t key() const { return key_; }

 private:
  uint64_t key_;
  uint64_t state_;
};

}  // namespace polymer
