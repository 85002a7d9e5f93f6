#pragma once

#include <cstdint>
#include <random>

namespace apdsim {

/// Seeded deterministic random stream. Batch runs derive stream k from
/// base_seed + k; the raw value is scrambled through one splitmix64 step
/// before seeding the engine so adjacent seeds decorrelate. Every sampling
/// call consumes exactly one engine draw, which keeps paired-seed runs
/// aligned draw for draw.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(scramble(seed)) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Poisson by inversion from a single uniform; exact and portable for
    /// the moderate means used here (gate fluxes up to a few hundred).
    std::uint64_t poisson(double mean) {
        const double u = uniform();
        double term = std::exp(-mean);
        double cdf = term;
        std::uint64_t k = 0;
        while (u >= cdf && k < 100000) {
            ++k;
            term *= mean / static_cast<double>(k);
            cdf += term;
        }
        return k;
    }

private:
    static std::uint64_t scramble(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace apdsim
