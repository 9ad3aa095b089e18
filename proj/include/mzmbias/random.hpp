#pragma once

#include <cstdint>
#include <random>

namespace mzmbias {

/// Seeded Gaussian stream that produces identical sequences on every
/// platform. The engine is std::mt19937_64, whose output sequence is fixed by
/// the C++ standard; the normal transform is the Box-Muller method applied to
/// 53-bit uniforms (std::normal_distribution is implementation-defined, so it
/// is not used).
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in (0, 1].
    double uniform();

    /// Standard normal deviate.
    double standard_normal();

    double normal(double sigma) { return sigma * standard_normal(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finalizer, used to derive independent sub-seeds from one run
/// seed.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mzmbias
