#pragma once

#include <cstdint>
#include <limits>

namespace qkdfs {

// Counter-based random stream. Output i of a stream is a pure function of
// (key, i), so a round's draws never depend on which worker executes it.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Stream(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return mix(key_ + (++counter_) * kGolden); }

  // Uniform double in [0,1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  constexpr bool bernoulli(double p) noexcept { return uniform() < p; }

  // Uniform integer in [0, n); n must be > 0. Lemire-style multiply-shift,
  // bias below 2^-32 for the small n used here.
  constexpr std::uint32_t below(std::uint32_t n) noexcept {
    return static_cast<std::uint32_t>(((*this)() >> 32) * n >> 32);
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t draws() const noexcept { return counter_; }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Substream for one partition (round, frame, sweep point) of a seeded run.
constexpr Stream derive_stream(std::uint64_t seed, std::uint64_t index) noexcept {
  return Stream(Stream::mix(Stream::mix(seed) ^ Stream::mix(index + 0xd1b54a32d192ed03ULL)));
}

}  // namespace qkdfs
