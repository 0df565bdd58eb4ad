#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace wavefis {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded random source. All draws are built from the raw engine output with
/// explicit transforms, so identical seeds give identical streams everywhere
/// the same libm is used; std::*_distribution is deliberately avoided.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    /// [0, 1)
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// standard normal via Box-Muller (no caching, one value per call)
    double normal() {
        double u1 = 1.0 - uniform01();  // (0, 1]
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double lognormal(double mu_log, double sigma_log) {
        return std::exp(mu_log + sigma_log * normal());
    }

    /// Poisson draw; inversion for small rates, rounded normal beyond.
    long poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda <= 30.0) {
            const double limit = std::exp(-lambda);
            double prod = uniform01();
            long k = 0;
            while (prod > limit) {
                ++k;
                prod *= uniform01();
            }
            return k;
        }
        double x = lambda + std::sqrt(lambda) * normal();
        return x < 0.0 ? 0 : static_cast<long>(std::llround(x));
    }

    /// uniform in [0, n), rejection-sampled so every value is equally likely
    size_t index(size_t n) {
        if (n <= 1) return 0;
        const uint64_t span = n;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return static_cast<size_t>(x % span);
    }

    /// Fisher-Yates with the explicit index() draw (determinism contract)
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace wavefis
