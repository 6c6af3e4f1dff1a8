#pragma once

// Counter-based random number generation (Philox4x32-10).
//
// Every draw is a pure function of (seed, stream, draw index), so trajectories
// and fictitious-path samplers get independent, reproducible streams no matter
// how work is scheduled across threads.
//
// Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC 2011.

#include <array>
#include <cstdint>

namespace qjt {

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0,
                         std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

} // namespace detail

/// One 128-bit Philox4x32-10 block for the given key and counter.
inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                               std::array<std::uint32_t, 4> ctr) {
    auto k0 = static_cast<std::uint32_t>(key);
    auto k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        detail::philox_round(ctr, k0, k1);
        k0 += detail::kPhiloxW0;
        k1 += detail::kPhiloxW1;
    }
    return ctr;
}

/// Stream kinds keep unrelated consumers of randomness decorrelated.
enum class StreamKind : std::uint32_t {
    Trajectory = 0, // one stream per (seed, trajectory_index)
    Fictitious = 1, // one stream per (seed, trajectory_index, sample_index)
    Test = 2,       // scratch streams for property-test generators
};

// Draw indices reserved inside a Trajectory stream. Steps use 1..n_steps.
inline constexpr std::uint64_t kDrawInitialState = 0;
inline std::uint64_t draw_index_step(std::int64_t n) { return 1 + static_cast<std::uint64_t>(n); }
inline std::uint64_t draw_index_final(std::int64_t n_steps) {
    return 1 + static_cast<std::uint64_t>(n_steps);
}

/// Stateless-by-construction generator: `at(i)` never depends on call order.
/// `next_*` just advances an internal draw index for convenience.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, StreamKind kind, std::uint64_t trajectory_index,
               std::uint32_t sample_index = 0)
        : seed_(seed),
          traj_lo_(static_cast<std::uint32_t>(trajectory_index)),
          hi_word_((static_cast<std::uint32_t>(kind) << 24) |
                   (static_cast<std::uint32_t>(trajectory_index >> 32) & 0x00FFFFFFu)),
          sample_(sample_index) {}

    std::uint64_t u64_at(std::uint64_t idx) const {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32) ^ sample_,
            traj_lo_, hi_word_};
        const auto out = philox4x32(seed_, ctr);
        return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform_at(std::uint64_t idx) const {
        return static_cast<double>(u64_at(idx) >> 11) * 0x1.0p-53;
    }

    std::uint64_t next_u64() { return u64_at(idx_++); }
    double next_uniform() { return uniform_at(idx_++); }

    void seek(std::uint64_t idx) { idx_ = idx; }
    std::uint64_t position() const { return idx_; }

  private:
    std::uint64_t seed_;
    std::uint32_t traj_lo_;
    std::uint32_t hi_word_;
    std::uint32_t sample_;
    std::uint64_t idx_ = 0;
};

} // namespace qjt
