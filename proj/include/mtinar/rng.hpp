#pragma once

#include <cstdint>
#include <random>

namespace mtinar {

/// Deterministic random stream. A given seed and call sequence always
/// produce the same outputs (mt19937_64 is fully specified by the standard,
/// and all samplers below avoid unspecified library distributions).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1); rejects the zero draw.
    double next_uniform_positive() {
        double u;
        do {
            u = next_uniform();
        } while (u <= 0.0);
        return u;
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

/// SplitMix64 finalizer; good avalanche for counter-based seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based seed split: hashes (master, a, b, c) to an independent
/// 64-bit stream seed. Used to give every study replication its own stream
/// so parallel schedules cannot affect results.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b, std::uint64_t c);

/// Poisson variate, Knuth product-of-uniforms with additive splitting for
/// large means (exact: the sum of independent Poissons is Poisson).
int sample_poisson(double mean, RngStream& rng);

/// Geometric variate on {0,1,2,...} with P(k) = m^k / (1+m)^(k+1),
/// i.e. mean m, sampled by inversion.
int sample_geometric_mean(double mean, RngStream& rng);

}  // namespace mtinar
