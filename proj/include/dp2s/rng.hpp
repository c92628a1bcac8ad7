#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace dp2s {

/// Philox4x32-10 block function (Salmon et al., SC'11). Pure: the same
/// counter and key always give the same four output words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer; used to fold structured indices into a stream id.
std::uint64_t mix64(std::uint64_t x);

/// Folds a list of indices into a single 64-bit stream id.
std::uint64_t derive_stream_id(std::initializer_list<std::uint64_t> parts);

/// Counter-based random stream.
///
/// The key is the seed; the 128-bit counter carries the stream id (64 bits),
/// a lane (32 bits) and a block index (32 bits). Streams with different
/// (seed, stream_id, lane) never share a counter, so they are independent and
/// can be handed to any thread without coordination.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint32_t lane = 0);

  /// Same seed and stream id, different lane. Used to give each consumer
  /// within one replicate its own sequence.
  [[nodiscard]] RngStream lane(std::uint32_t lane) const;

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform on the open interval (0, 1).
  double uniform_open();

  /// Uniform integer in [0, bound), bound > 0. Lemire's nearly-divisionless
  /// method, so the result is unbiased.
  std::uint64_t below(std::uint64_t bound);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint32_t lane_;
  std::uint32_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

}  // namespace dp2s
