#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace infodyn {

enum class StandardDistribution { Normal, ChiSquare1 };

/// Seeded random stream. Identical (seed, stream) pairs replay identical sequences, and
/// distinct streams are statistically independent, so parallel tasks each own one.
class RngHandle {
public:
    explicit RngHandle(std::uint64_t seed, std::uint64_t stream = 0);

    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] std::uint64_t stream() const { return stream_; }

    /// Child stream keyed by `id`; depends only on (seed, stream, id), never on draw history.
    [[nodiscard]] RngHandle substream(std::uint64_t id) const;

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    double chi_square_1() {
        const double z = normal();
        return z * z;
    }
    double draw(StandardDistribution dist) {
        return dist == StandardDistribution::Normal ? normal() : chi_square_1();
    }
    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
    }
    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

[[nodiscard]] std::vector<double> sample_standard(RngHandle& rng, StandardDistribution dist, std::size_t n);

/// SplitMix64 finalizer, used to derive independent seeds.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x);

}  // namespace infodyn
