#pragma once

#include <cstdint>
#include <string_view>

namespace qfu {

// Splittable counter-based generator. Each stream is (key, counter); output
// words come from a SplitMix64-style finalizer, so a stream never needs to
// know how many words its siblings consumed. Every sampling operation in the
// library takes an explicit Rng&, which is what makes transcript replay
// bit-exact.
class Rng {
 public:
  explicit Rng(uint64_t seed) : key_(mix(seed ^ 0x9e3779b97f4a7c15ull)), ctr_(0) {}

  // Derives an independent child stream. Children of distinct tags (or of
  // distinct parents) never collide.
  Rng split(uint64_t tag) const {
    Rng child(0);
    child.key_ = mix(key_ ^ mix(tag ^ 0xbf58476d1ce4e5b9ull));
    child.ctr_ = 0;
    return child;
  }

  // Convenience: tag by label (FNV-1a of the string).
  Rng split(std::string_view label) const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : label) {
      h ^= uint8_t(c);
      h *= 0x100000001b3ull;
    }
    return split(h);
  }

  uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ull * ++ctr_); }

  // Uniform in [0, 1).
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  int next_bit() { return static_cast<int>(next_u64() >> 63); }

  // Uniform in {0, ..., n-1}.
  uint64_t below(uint64_t n) {
    // Rejection sampling; bias-free.
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

 private:
  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  uint64_t key_;
  uint64_t ctr_;
};

}  // namespace qfu
