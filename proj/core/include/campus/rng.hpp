#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace campus {

/// Deterministic per-replicate random stream.
///
/// All draws are derived from a 64-bit Mersenne Twister through explicit
/// transforms, so an identical seed yields an identical draw sequence on any
/// conforming standard library. (Only gamma() relies on a std distribution.)
class RngStream {
public:
    using engine_type = std::mt19937_64;

    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Exponential with the given rate (mean 1/rate).
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    double gamma(double shape)
    {
        std::gamma_distribution<double> dist(shape, 1.0);
        return dist(engine_);
    }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n)
    {
        // Lemire-free simple rejection keeps the stream portable.
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = engine_type::max() - engine_type::max() % bound;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return static_cast<std::size_t>(r % bound);
    }

    /// Fisher-Yates shuffle driven by index().
    template <typename T>
    void shuffle(std::span<T> items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

    engine_type& engine() { return engine_; }

private:
    engine_type engine_;
};

} // namespace campus
