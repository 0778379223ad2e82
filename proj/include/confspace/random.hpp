#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace confspace {

namespace detail {
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}
}  // namespace detail

/// Reproducible random stream addressed by (master seed, replicate index,
/// purpose tag). Identical addresses give identical draws; distinct addresses
/// are seeded through independent seed_seq expansions, so their sequences are
/// distinct by construction. Each worker owns its stream, which makes every
/// aggregate independent of the worker count.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t replicate = 0,
                          std::string_view purpose = {})
        : seed_(seed), replicate_(replicate), purpose_(detail::fnv1a(purpose)) {
        std::seed_seq seq{
            static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
            static_cast<std::uint32_t>(replicate_), static_cast<std::uint32_t>(replicate_ >> 32),
            static_cast<std::uint32_t>(purpose_), static_cast<std::uint32_t>(purpose_ >> 32)};
        gen_.seed(seq);
    }

    std::uint64_t master_seed() const { return seed_; }
    std::uint64_t replicate() const { return replicate_; }

    /// Derived stream for a sub-purpose of the same replicate.
    RandomStream substream(std::string_view purpose) const {
        RandomStream s(seed_, replicate_, "");
        s.purpose_ = detail::fnv1a(purpose) ^ (purpose_ * 0x9e3779b97f4a7c15ULL);
        std::seed_seq seq{
            static_cast<std::uint32_t>(s.seed_), static_cast<std::uint32_t>(s.seed_ >> 32),
            static_cast<std::uint32_t>(s.replicate_), static_cast<std::uint32_t>(s.replicate_ >> 32),
            static_cast<std::uint32_t>(s.purpose_), static_cast<std::uint32_t>(s.purpose_ >> 32)};
        s.gen_.seed(seq);
        return s;
    }

    std::uint64_t raw() { return gen_(); }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(gen_); }

    double uniform(double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(gen_);
    }

    long poisson(double mean) {
        if (mean <= 0.0) return 0;
        return std::poisson_distribution<long>(mean)(gen_);
    }

    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_);
    }

private:
    std::uint64_t seed_;
    std::uint64_t replicate_;
    std::uint64_t purpose_;
    std::mt19937_64 gen_;
};

/// k replicate streams of a master seed; stream i carries path (seed, i).
inline std::vector<RandomStream> replicate_streams(std::uint64_t seed, int k) {
    std::vector<RandomStream> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) out.emplace_back(seed, static_cast<std::uint64_t>(i));
    return out;
}

}  // namespace confspace
