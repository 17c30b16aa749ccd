#include "mtinar/rng.hpp"

#include <cmath>

namespace mtinar {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ (a + 0x632be59bd9b4e019ULL));
    h = splitmix64(h ^ (b + 0x9e6c63d0876a9a62ULL));
    h = splitmix64(h ^ (c + 0xc2b2ae3d27d4eb4fULL));
    return h;
}

namespace {

int poisson_knuth(double mean, RngStream& rng) {
    const double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= rng.next_uniform_positive();
    } while (p > limit);
    return k - 1;
}

}  // namespace

int sample_poisson(double mean, RngStream& rng) {
    int total = 0;
    while (mean > 30.0) {
        total += poisson_knuth(30.0, rng);
        mean -= 30.0;
    }
    return total + poisson_knuth(mean, rng);
}

int sample_geometric_mean(double mean, RngStream& rng) {
    // P(K >= k) = f^k with failure probability f = m/(1+m).
    const double log_f = std::log(mean) - std::log1p(mean);
    const double u = rng.next_uniform_positive();
    const double k = std::floor(std::log(u) / log_f);
    if (k < 0.0) return 0;  // guards against -0 and rounding at u ~ 1
    if (k > 1e9) return 1000000000;
    return static_cast<int>(k);
}

}  // namespace mtinar
