#pragma once

#include <cstdint>

namespace boolezeta {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Map 64 random bits to a double in the open interval (0,1).
inline constexpr double open_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Seed of worker `index` derived from the master seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Counter-based uniform: the value for (stream, counter) never depends on call order.
inline constexpr double counter_uniform(std::uint64_t stream, std::uint64_t counter) {
    return open_unit(splitmix64(stream ^ splitmix64(counter)));
}

/// Small sequential generator for code that consumes a stream of draws.
class SplitMix {
public:
    using result_type = std::uint64_t;
    explicit constexpr SplitMix(std::uint64_t seed) : state_(seed) {}
    constexpr result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    constexpr double uniform() { return open_unit((*this)()); }
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

private:
    std::uint64_t state_;
};

}  // namespace boolezeta
