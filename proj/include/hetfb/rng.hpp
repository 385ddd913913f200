#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace hetfb {

using Rng = std::mt19937_64;

/// Seed for substream `index` of `master`. Independent indices give
/// statistically unrelated streams, so trials and users can be generated in
/// any order or on any worker and still reproduce the serial result.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    // splitmix64 finalizer applied to a mix of both words
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b)
{
    return derive_seed(derive_seed(master, a), b);
}

/// Standard circular complex Gaussian: E|z|^2 = 1.
class CircularGaussian {
public:
    std::complex<double> operator()(Rng& rng) { return {normal_(rng), normal_(rng)}; }

private:
    std::normal_distribution<double> normal_{0.0, 0.70710678118654752440};
};

} // namespace hetfb
