#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace fsq {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// The 64-bit seed is the key; the 64-bit stream id occupies the high half of
/// the counter, so every (seed, stream) pair is an independent sequence of
/// 2^66 outputs. Satisfies UniformRandomBitGenerator.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr const char* kName = "philox4x32-10";

  explicit Philox4x32(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (index_ == 4) {
      buffer_ = generate_block(Block{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                     static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                               key_);
      ++block_;
      index_ = 0;
    }
    return buffer_[index_++];
  }

  /// The raw bijection: ten Philox rounds applied to `counter` under `key`.
  static constexpr Block generate_block(Block counter, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kMultiplier0} * counter[0];
      const std::uint64_t p1 = std::uint64_t{kMultiplier1} * counter[2];
      counter = Block{static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ key[0], static_cast<std::uint32_t>(p1),
                      static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return counter;
  }

 private:
  static constexpr std::uint32_t kMultiplier0 = 0xD2511F53u;
  static constexpr std::uint32_t kMultiplier1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int index_ = 4;
};

/// Purposes of derived random streams; keeps unrelated draws disjoint.
enum class StreamTag : std::uint64_t {
  paths = 1,
  grid = 2,
  jacobian = 3,
  score_covariance = 4,
  sigma = 5,
  replication = 6,
  reference = 7,
  probes = 8,
};

inline constexpr std::uint64_t stream_id(StreamTag tag, std::uint64_t index) noexcept {
  return (static_cast<std::uint64_t>(tag) << 48) ^ index;
}

/// Mixes a parent seed with a child index into a fresh seed (splitmix64 finalizer).
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t child) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (child + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace fsq
