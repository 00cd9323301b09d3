#include "lmc/rng.hpp"

#include <cmath>
#include <numbers>

namespace lmc {
namespace detail {

PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) noexcept
{
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

}  // namespace detail

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id,
                     std::uint64_t counter) noexcept
    : seed_(seed), stream_id_(stream_id), counter_(counter)
{
}

std::uint64_t RngStream::next_u64() noexcept
{
    const detail::PhiloxBlock ctr{static_cast<std::uint32_t>(counter_),
                                  static_cast<std::uint32_t>(counter_ >> 32),
                                  static_cast<std::uint32_t>(stream_id_),
                                  static_cast<std::uint32_t>(stream_id_ >> 32)};
    const detail::PhiloxKey key{static_cast<std::uint32_t>(seed_),
                                static_cast<std::uint32_t>(seed_ >> 32)};
    ++counter_;
    const auto out = detail::philox4x32_10(ctr, key);
    return (std::uint64_t{out[1]} << 32) | out[0];
}

double RngStream::next_uniform() noexcept
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_normal() noexcept
{
    // 1 - u lies in (0, 1], so the log is finite.
    const double u1 = 1.0 - next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1))
           * std::cos(2.0 * std::numbers::pi * u2);
}

RngStream split(std::uint64_t seed, std::uint64_t chain_id) noexcept
{
    return RngStream(seed, chain_id, 0);
}

}  // namespace lmc
