#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace cbench {

/// Identifies one independent random stream: a master seed plus a stream index.
/// Identical specs reproduce identical sample paths bit-for-bit.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    /// Spec for sub-stream `k` of this stream. Children of distinct parents or with distinct
    /// indices never share a (key, counter) region.
    [[nodiscard]] SeedSpec derive(std::uint64_t k) const noexcept;

    friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Philox4x32-10 block function (Salmon et al. 2011). Pure: output depends only on (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based generator. The key is the master seed, the upper counter words the stream id
/// and the lower counter words the block index, so streams can be created in any order.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(SeedSpec seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on the open interval (0,1) with 53 bits of resolution.
    double uniform() noexcept;
    /// Standard normal via Box-Muller (one variate per call, no cached state).
    double normal() noexcept;
    double exponential() noexcept;
    /// Gamma(shape, 1) by Marsaglia-Tsang; shape > 0.
    double gamma(double shape) noexcept;

    [[nodiscard]] SeedSpec seed() const noexcept { return seed_; }

private:
    void refill() noexcept;

    SeedSpec seed_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int available_ = 0;
};

}  // namespace cbench
