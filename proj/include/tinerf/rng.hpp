#pragma once

#include <cstdint>

// Counter-based deterministic RNG.
//
// Every random decision in the pipeline derives its stream from
// (seed, purpose tag, counters) instead of consuming a shared generator,
// so results are independent of thread scheduling and evaluation order.

namespace tinerf {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Mix an arbitrary list of 64-bit words into one stream seed.
inline uint64_t mix_seed(uint64_t a) { return splitmix64(a); }
template <class... Rest>
inline uint64_t mix_seed(uint64_t a, Rest... rest) {
  return splitmix64(a ^ mix_seed(static_cast<uint64_t>(rest)...));
}

// Stream tags. Keeping them in one place avoids accidental collisions.
enum class RngStream : uint64_t {
  ray_pixel = 0x01,       // which pixel/frame a training ray comes from
  stratified = 0x02,      // jitter inside stratified bins
  importance = 0x03,      // inverse-CDF draws for the fine pass
  occupancy = 0x04,       // random query point inside an occupancy cell
  param_init = 0x05,      // parameter initialization
  scene = 0x06,           // synthetic scene generation
  misc = 0x07,
};

// Small xorshift-style generator seeded by splitmix64. State never zero.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(splitmix64(seed)) {
    if (state_ == 0) state_ = 0x9e3779b97f4a7c15ull;
  }

  template <class... Words>
  Rng(uint64_t seed, RngStream stream, Words... counters)
      : Rng(mix_seed(seed, static_cast<uint64_t>(stream),
                     static_cast<uint64_t>(counters)...)) {}

  uint64_t next_u64() {
    // xorshift64* — plenty for sampling jitter, cheap and portable.
    uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dull;
  }

  uint32_t next_u32() { return static_cast<uint32_t>(next_u64() >> 32); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0; modulo bias is irrelevant at
  // the n we use (<< 2^32) but use 64-bit multiply-shift anyway.
  uint64_t below(uint64_t n) {
    // Lemire's multiply-shift reduction.
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<uint64_t>(m >> 64);
  }

 private:
  uint64_t state_;
};

}  // namespace tinerf
