#pragma once

#include <array>
#include <cstdint>

namespace lmc {

//---------------------------------------------------------------------------//
/*!
 * Counter-based random stream (Philox4x32-10 keyed by the experiment seed).
 *
 * The full state is (seed, stream_id, counter). Each 64-bit draw consumes one
 * Philox block: the counter occupies the low two words of the block and the
 * stream id the high two, so distinct streams never share a block.
 *
 * Normal variates use the trigonometric Box-Muller transform and consume
 * exactly two uniforms (two counter steps) each; the sine branch is
 * discarded so that every normal draw advances the stream by the same amount.
 *
 * A stream has a single owner. Copying a stream clones it.
 */
class RngStream
{
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id,
              std::uint64_t counter = 0) noexcept;

    std::uint64_t next_u64() noexcept;

    //! Uniform on [0, 1) with 53 bits of resolution.
    double next_uniform() noexcept;

    //! Standard normal variate.
    double next_normal() noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    std::uint64_t counter() const noexcept { return counter_; }

    friend bool operator==(const RngStream&, const RngStream&) = default;

  private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t counter_;
};

//! Per-chain stream; the stream id is the chain id itself (injective).
RngStream split(std::uint64_t seed, std::uint64_t chain_id) noexcept;

namespace detail {
using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) noexcept;
}  // namespace detail

}  // namespace lmc
