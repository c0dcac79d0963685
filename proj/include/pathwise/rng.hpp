#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace pathwise {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t tag_hash(std::string_view tag);

/// Child seed for the stream named `tag` with ordinal `index` under `master`.
///
/// child = splitmix64(splitmix64(master ^ fnv1a(tag)) + golden * (index + 1))
///
/// The result depends only on its three inputs, so any work split across
/// threads draws from the same streams as a sequential run.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index = 0);

/// xoshiro256** generator. Cheap to construct, which matters for one stream per Monte Carlo sample.
class Stream {
public:
    using result_type = std::uint64_t;

    explicit Stream(std::uint64_t seed);
    Stream(std::uint64_t master, std::string_view tag, std::uint64_t index = 0)
        : Stream(derive_seed(master, tag, index)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    /// Standard normal draw (Box-Muller; both variates are used).
    double normal();
    /// Uniform draw on [0, 1).
    double uniform();

private:
    std::uint64_t s_[4];
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace pathwise
