#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace hkn {

/// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: the output
/// is a pure function of (counter, key).
class Philox4x32 {
public:
    using counter_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    static constexpr counter_type apply(counter_type ctr, key_type key) noexcept
    {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            ctr = single_round(ctr, key);
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr counter_type single_round(const counter_type& c, const key_type& k) noexcept
    {
        const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// What a draw is used for. Distinct purposes never share a counter.
enum class Purpose : std::uint8_t {
    EnvNoise = 1,
    CommNoise = 2,
    CommonShock = 3,
    Adversary = 4,
    InitialState = 5,
    Population = 6,
    Synthetic = 7,
};

/// Identifies a reproducible random stream. Replicate k of master seed s is
/// the same stream as replicate 0 of master seed s + k.
struct RngContext {
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;

    constexpr std::uint64_t stream_seed() const noexcept { return seed + replicate; }
};

/// Counter-based source: each draw is keyed by (stream, step, slot, purpose,
/// draw index), so results do not depend on call order or thread schedule.
class CounterRng {
public:
    constexpr explicit CounterRng(RngContext ctx) noexcept
    {
        const std::uint64_t k = splitmix64(ctx.stream_seed());
        key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    }

    constexpr std::array<std::uint32_t, 4> block(std::uint64_t step, std::uint32_t slot,
                                                 Purpose purpose, std::uint32_t draw) const noexcept
    {
        const Philox4x32::counter_type ctr{
            static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), slot,
            (static_cast<std::uint32_t>(purpose) << 24) ^ (draw & 0x00FFFFFFu)};
        return Philox4x32::apply(ctr, key_);
    }

    /// Two independent doubles in [0, 1) with 53-bit resolution.
    constexpr std::array<double, 2> uniform_pair(std::uint64_t step, std::uint32_t slot,
                                                 Purpose purpose, std::uint32_t draw = 0) const noexcept
    {
        const auto w = block(step, slot, purpose, draw);
        return {to_unit(w[0], w[1]), to_unit(w[2], w[3])};
    }

    constexpr double uniform(std::uint64_t step, std::uint32_t slot, Purpose purpose,
                             std::uint32_t draw = 0) const noexcept
    {
        return uniform_pair(step, slot, purpose, draw)[0];
    }

private:
    static constexpr double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept
    {
        const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
        return static_cast<double>(bits) * 0x1.0p-53;
    }

    Philox4x32::key_type key_{};
};

/// Slot id for an ordered pair (j -> i); stable for any n < 65536.
constexpr std::uint32_t edge_slot(std::size_t from, std::size_t to) noexcept
{
    return (static_cast<std::uint32_t>(from) << 16) | static_cast<std::uint32_t>(to);
}

} // namespace hkn
