#ifndef TRAVMAP_RANDOM_HPP
#define TRAVMAP_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace travmap {

/*
 * Seeded generator whose outputs are identical on every platform.
 * std::mt19937_64 is fully specified by the standard; the distribution
 * objects are not, so uniform and normal draws are derived here.
 */
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : mEngine(seed) { }

    std::uint64_t next_u64() { return mEngine(); }

    /* Uniform double in [0, 1) with 53 random bits */
    double uniform() { return static_cast<double>(mEngine() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /* Uniform integer in [0, n) without modulo bias */
    std::uint64_t below(std::uint64_t n)
    {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = mEngine();
        } while (r >= limit);
        return r % n;
    }

    /* Standard normal via Box-Muller; the paired value is discarded */
    double normal()
    {
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

private:
    std::mt19937_64 mEngine;
};

} // namespace travmap

#endif // TRAVMAP_RANDOM_HPP
