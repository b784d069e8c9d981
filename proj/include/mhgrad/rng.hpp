#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mhgrad {

// SplitMix64 avalanche step.  Used both as a seed mixer and as the
// stream-derivation primitive: derived seeds are well spread even for
// adjacent (replicate, stream) indices.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic sub-stream seed for (replicate, stream) under a master seed.
// Pure function of its inputs, so task scheduling order and worker count
// cannot affect which random numbers a task consumes.
inline std::uint64_t derive_stream_seed(std::uint64_t master,
                                        std::uint64_t replicate,
                                        std::uint64_t stream) {
    std::uint64_t s = splitmix64(master ^ 0x243f6a8885a308d3ULL);
    s = splitmix64(s ^ splitmix64(replicate + 0x452821e638d01377ULL));
    s = splitmix64(s ^ splitmix64(stream + 0x13198a2e03707344ULL));
    return s;
}

// Standard-normal stream: mt19937_64 + Box-Muller with a cached spare.
// The sequence is fixed by the seed alone.
class NormalRng {
  public:
    explicit NormalRng(std::uint64_t seed) : gen_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // uniforms in (0,1]; u1 > 0 keeps log finite
        const double u1 = ((gen_() >> 11) + 1.0) * 0x1p-53;
        const double u2 = (gen_() >> 11) * 0x1p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace mhgrad
