#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace sgbh {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Every draw is a pure function of (key, counter), so any random number in
/// an ensemble can be regenerated from its coordinates alone. That is what
/// makes ensemble results independent of worker count and scheduling.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter generate(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Coordinates of one pair of standard normals.
struct DrawCoordinates {
    std::uint64_t seed = 0;
    std::uint32_t stream = 0;  // path index
    std::uint32_t step = 0;
    std::uint32_t pair = 0;    // mode / 2, or sub-step index for bridges
    std::uint32_t domain = 0;  // 0 = base increments, otherwise refinement tag
};

namespace detail {

// 53-bit uniform on (0, 1]; never returns 0 so log() is safe.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace detail

/// Two independent N(0,1) draws (Box-Muller) at the given coordinates.
inline std::pair<double, double> normal_pair(const DrawCoordinates& at) noexcept {
    const Philox4x32::Key key{static_cast<std::uint32_t>(at.seed),
                              static_cast<std::uint32_t>(at.seed >> 32)};
    const Philox4x32::Counter ctr{at.pair, at.step, at.stream, at.domain};
    const auto out = Philox4x32::generate(ctr, key);
    const double u1 = detail::to_open_unit(out[0], out[1]);
    const double u2 = detail::to_open_unit(out[2], out[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace sgbh
