#pragma once

#include <cstdint>

namespace fluidfrag {

// splitmix64 finalizer; used as a counter-based generator so that streams
// are reproducible independent of scheduling.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent substream of a seeded counter RNG.
class CounterRng {
   public:
    CounterRng(uint64_t seed, uint64_t stream)
        : key_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

    uint64_t next() { return splitmix64(key_ + counter_++); }

    /// uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

   private:
    uint64_t key_;
    uint64_t counter_ = 0;
};

}  // namespace fluidfrag
