#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (key, counter), so a simulation can address its randomness by meaning
// (vertex, clock ring, slot) instead of by draw order. That is what makes
// runs at different parameters share randomness exactly.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

namespace ccsim {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
    return splitmix64(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
}

// Key for replica `replica` of a run seeded with `seed`.
inline constexpr std::uint64_t replica_key(std::uint64_t seed, std::uint64_t replica) noexcept {
    return hash_combine(splitmix64(seed), replica);
}

// Philox4x32-10 (Salmon et al., SC'11).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;

    explicit constexpr Philox4x32(std::uint64_t key) noexcept
        : k0_(static_cast<std::uint32_t>(key)), k1_(static_cast<std::uint32_t>(key >> 32)) {}

    constexpr Counter operator()(Counter c) const noexcept {
        std::uint32_t k0 = k0_, k1 = k1_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{kM0} * c[0];
            const std::uint64_t p1 = std::uint64_t{kM1} * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0, static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1, static_cast<std::uint32_t>(p0)};
            k0 += kW0;
            k1 += kW1;
        }
        return c;
    }

    // 64 random bits for the 128-bit counter (hi, lo).
    constexpr std::uint64_t bits(std::uint64_t hi, std::uint64_t lo) const noexcept {
        const Counter out = (*this)({static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(lo >> 32),
                                     static_cast<std::uint32_t>(hi), static_cast<std::uint32_t>(hi >> 32)});
        return (std::uint64_t{out[0]} << 32) | out[1];
    }

    // All 128 output bits for the counter (hi, lo).
    constexpr std::array<std::uint64_t, 2> bits2(std::uint64_t hi, std::uint64_t lo) const noexcept {
        const Counter out = (*this)({static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(lo >> 32),
                                     static_cast<std::uint32_t>(hi), static_cast<std::uint32_t>(hi >> 32)});
        return {(std::uint64_t{out[0]} << 32) | out[1], (std::uint64_t{out[2]} << 32) | out[3]};
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;
    std::uint32_t k0_;
    std::uint32_t k1_;
};

// Uniform on the open interval (0,1) from 64 random bits.
inline constexpr double to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double exponential_from(double u) noexcept { return -std::log(u); }

// Random access view: uniform(a, b) for any 128-bit address (a, b).
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t key) noexcept : philox_(key) {}

    constexpr std::uint64_t bits(std::uint64_t a, std::uint64_t b) const noexcept { return philox_.bits(a, b); }
    constexpr double uniform(std::uint64_t a, std::uint64_t b) const noexcept { return to_open_unit(bits(a, b)); }
    // Two independent uniforms from one block; .first equals uniform(a, b).
    constexpr std::pair<double, double> uniform_pair(std::uint64_t a, std::uint64_t b) const noexcept {
        const auto w = philox_.bits2(a, b);
        return {to_open_unit(w[0]), to_open_unit(w[1])};
    }

private:
    Philox4x32 philox_;
};

// Sequential stream over one address prefix; satisfies UniformRandomBitGenerator
// so it can drive the standard distributions.
class StreamRng {
public:
    using result_type = std::uint64_t;

    constexpr StreamRng(std::uint64_t key, std::uint64_t stream) noexcept : rng_(key), stream_(stream) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept { return rng_.bits(stream_, counter_++); }
    constexpr double uniform() noexcept { return to_open_unit((*this)()); }
    double exponential(double rate) noexcept { return exponential_from(uniform()) / rate; }

    constexpr std::uint64_t draws() const noexcept { return counter_; }

private:
    CounterRng rng_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace ccsim
