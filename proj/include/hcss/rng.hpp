// SPDX-License-Identifier: Apache-2.0
// Counter-keyed deterministic random streams for Monte Carlo channel draws.

#ifndef HCSS_RNG_HPP
#define HCSS_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <stdexcept>

namespace hcss {

// splitmix64 step (Steele/Lea/Flood constants), used both as a key mixer and
// as the state initializer recommended for xoshiro generators.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** with Box-Muller Gaussians and a Marsaglia-Tsang gamma sampler.
// A stream is identified by an arbitrary list of 64-bit key words (master
// seed, trial index, link tag, ...); equal keys give bit-identical streams.
class RngStream {
  public:
    RngStream() : RngStream({0}) {}

    explicit RngStream(std::initializer_list<std::uint64_t> key) {
        std::uint64_t h = 0x243f6a8885a308d3ULL;  // pi digits, arbitrary nonzero
        for (std::uint64_t k : key) {
            h ^= k + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            (void)splitmix64(h);
        }
        for (auto& word : s_) word = splitmix64(h);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on the open interval (0,1); never returns an endpoint, so it is
    // safe inside logs.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; the second variate of each pair is
    // cached so consecutive calls stay cheap and deterministic.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Gamma(shape, scale) for shape >= 1 (Marsaglia-Tsang squeeze method).
    double gamma(double shape, double scale) {
        if (!(shape >= 1.0) || !(scale > 0.0))
            throw std::invalid_argument("gamma: need shape >= 1 and scale > 0");
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = gaussian();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace hcss

#endif
