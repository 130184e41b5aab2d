#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace chartfolio {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Maps a 128-bit counter and 64-bit key to 128 random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// 64-bit FNV-1a; used to turn labels and sample ids into stream ids.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based random stream. The key is the global seed, the upper half of
/// the counter is the stream id, and the lower half counts blocks, so any
/// (seed, stream id) pair is an independent, replayable sequence.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  /// Stream named by a fixed label, e.g. ("mc", repetition index).
  static RngStream derive(std::uint64_t seed, std::string_view label,
                          std::uint64_t index = 0) noexcept;
  /// Stream keyed by a string such as a sample id.
  static RngStream derive(std::uint64_t seed, std::string_view label,
                          std::string_view key) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept;
  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t blocks_used() const noexcept { return block_; }

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
};

}  // namespace chartfolio
