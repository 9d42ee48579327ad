#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace taskmap {

// mt19937_64 with explicit real-number mappings. The std::* distributions
// are implementation-defined, so every mapping is spelled out here; given a
// seed the byte stream of any generated artifact is identical on every
// platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // [0, 1), 53-bit resolution
    double uniform() {
        return static_cast<double>(eng_() >> 11) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive range
    int uniform_int(int lo, int hi) {
        const int span = hi - lo + 1;
        int v = static_cast<int>(uniform() * span);
        if (v >= span) v = span - 1;
        return lo + v;
    }

    // Box-Muller; consumes exactly two uniforms per draw
    double normal() {
        double u1 = uniform();
        const double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // CDF inversion; fine for the small lambdas used here
    int poisson(double lambda) {
        const double u = uniform();
        double p = std::exp(-lambda);
        double cdf = p;
        int k = 0;
        while (u > cdf && k < 100000) {
            ++k;
            p *= lambda / k;
            cdf += p;
        }
        return k;
    }

private:
    std::mt19937_64 eng_;
};

} // namespace taskmap
