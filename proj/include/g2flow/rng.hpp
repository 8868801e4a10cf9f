#pragma once

// Deterministic 64-bit generator used everywhere randomness is needed.
//
// This is SplitMix64: state advances by the golden-ratio increment and the
// output is a fixed finalizer mix.  The algorithm is pinned here so that
// seeded results are bit-identical across platforms and builds; do not
// substitute a std:: engine.

#include <cstdint>

namespace g2flow {

class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double real(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Uniform in [-1, 1).
  double sym() { return real(-1.0, 1.0); }

  // Integer in [0, n).
  uint64_t below(uint64_t n) { return next() % n; }

  // Independent substream: mixes a stream label into the current state.
  SplitMix64 fork(uint64_t label) const {
    SplitMix64 child(state_ ^ (0x632be59bd9b4e019ull * (label + 1)));
    child.next();
    return child;
  }

 private:
  uint64_t state_;
};

}  // namespace g2flow
