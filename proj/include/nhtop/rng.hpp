#pragma once

#include <cstdint>
#include <random>

namespace nhtop {

/// Seed derivation: splitmix64 finalizer. child_seed(parent, i) is a pure
/// function, so sweep tasks can derive their streams in any order.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t child_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    return splitmix64(parent ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline constexpr const char* kRngName = "mt19937_64/splitmix64-children";

/// mt19937_64 stream with a portable uniform mapping (53-bit mantissa), so
/// draws do not depend on the standard library's distribution implementation.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace nhtop
