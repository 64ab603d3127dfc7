#include "infodyn/random.hpp"

namespace infodyn {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

RngHandle::RngHandle(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(make_engine(seed, stream)) {}

RngHandle RngHandle::substream(std::uint64_t id) const { return RngHandle(mix64(seed_ ^ mix64(stream_)), id); }

std::vector<double> sample_standard(RngHandle& rng, StandardDistribution dist, std::size_t n) {
    std::vector<double> out(n);
    for (double& v : out) v = rng.draw(dist);
    return out;
}

}  // namespace infodyn
