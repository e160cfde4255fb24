#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace wflab {

//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 block function (Salmon et al., Random123).
 *
 * A counter-based generator: output is a pure function of (counter, key),
 * so streams can be split by assigning disjoint counter ranges.
 */
struct Philox4x32
{
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t kMul0 = 0xD2511F53;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

    static constexpr Counter round(Counter ctr, Key key)
    {
        std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        auto lo0 = static_cast<std::uint32_t>(p0);
        auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }

    static constexpr Counter block(Counter ctr, Key key)
    {
        for (int r = 0; r < 10; ++r)
        {
            ctr = round(ctr, key);
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

//---------------------------------------------------------------------------//
/*!
 * Random stream identified by (seed, stream id).
 *
 * The seed is the Philox key and the stream id occupies the upper half of
 * the counter, so stream k of seed s never overlaps any other stream and is
 * reproducible regardless of which thread draws it.
 */
class RandomStream
{
  public:
    using result_type = std::uint32_t;

    RandomStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)}
        , stream_{stream}
    {
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max()
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()()
    {
        if (pos_ == 4)
            refill();
        return buffer_[pos_++];
    }

    std::uint64_t next_u64()
    {
        std::uint64_t hi = (*this)();
        std::uint64_t lo = (*this)();
        return (hi << 32) | lo;
    }

    //! Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }

    //! Uniform double in (0, 1).
    double uniform_open()
    {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    //! Exponential variate with the given rate.
    double exponential(double rate) { return -std::log(uniform_open()) / rate; }

    //! Standard normal variate (Box-Muller, one value per call).
    double normal()
    {
        double u = uniform_open();
        double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
    }

    std::uint64_t draws() const { return block_ * 4 + pos_ - 4; }

  private:
    Philox4x32::Key key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Philox4x32::Counter buffer_{};
    int pos_ = 4;

    void refill()
    {
        Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_),
                                static_cast<std::uint32_t>(block_ >> 32),
                                static_cast<std::uint32_t>(stream_),
                                static_cast<std::uint32_t>(stream_ >> 32)};
        buffer_ = Philox4x32::block(ctr, key_);
        ++block_;
        pos_ = 0;
    }
};

//! SplitMix64 finalizer; derives child seeds from (seed, tag).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace wflab
