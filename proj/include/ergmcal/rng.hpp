#ifndef ERGMCAL_RNG_HPP_
#define ERGMCAL_RNG_HPP_

#include <cstdint>
#include <random>

namespace ergmcal {

/// Seeded 64-bit Mersenne Twister with numbered sub-streams.
///
/// Rng(seed, s) for distinct s are independently seeded through seed_seq,
/// so replicate chains and per-iteration simulations never share a stream.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    /// Independent child stream; the same (seed, stream, key) always yields the same child.
    Rng split(std::uint64_t key) const;

    std::uint64_t next() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform integer in [0, bound), bound > 0.
    std::uint64_t below(std::uint64_t bound);
    double normal() { return normal_(engine_); }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace ergmcal

#endif  // ERGMCAL_RNG_HPP_
