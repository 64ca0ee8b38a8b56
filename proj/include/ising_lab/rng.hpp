#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace ising_lab {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so results never depend on how work is scheduled.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

    static std::uint64_t mix(std::uint64_t z) noexcept {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t bits(std::uint64_t counter) const noexcept {
        return mix(key_ ^ mix(counter * 0xd1b54a32d192ed03ULL + 1));
    }

    // uniform in [0, 1) with 53 random bits
    double uniform(std::uint64_t counter) const noexcept {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    // +1 with probability p_plus, -1 otherwise
    int sign(std::uint64_t counter, double p_plus) const noexcept {
        return uniform(counter) < p_plus ? 1 : -1;
    }

    // standard normal via Box-Muller; consumes counters 2c and 2c+1
    double normal(std::uint64_t counter) const noexcept {
        double u1 = 1.0 - uniform(2 * counter);  // (0, 1]
        double u2 = uniform(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::uint64_t key_;
};

// Sequential adapter usable as a UniformRandomBitGenerator.
class StreamRng {
public:
    using result_type = std::uint64_t;
    StreamRng(std::uint64_t seed, std::uint64_t stream) noexcept : rng_(seed, stream) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept { return rng_.bits(counter_++); }
    double uniform() noexcept { return rng_.uniform(counter_++); }
    double normal() noexcept { return rng_.normal(counter_++); }

private:
    CounterRng rng_;
    std::uint64_t counter_ = 0;
};

}  // namespace ising_lab
