#include "mzmbias/random.hpp"

#include <cmath>
#include <numbers>

namespace mzmbias {

double GaussianStream::uniform() {
    // 53 random mantissa bits, shifted off zero so log() stays finite.
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

double GaussianStream::standard_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace mzmbias
