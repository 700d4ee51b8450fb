#pragma once

#include <array>
#include <cstdint>

namespace cnet {

/// Philox4x32-10 counter-based generator. The output for a given (key,
/// counter) pair is fixed by integer arithmetic alone, so streams are
/// reproducible on every platform.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer; used to derive independent stream ids.
std::uint64_t mix64(std::uint64_t x);

/// A sequential view over a Philox stream. `key` selects the stream, the
/// 128-bit counter is (position, stream_id).
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t key, std::uint64_t stream_id = 0, std::uint64_t position = 0)
      : key_(key), stream_id_(stream_id), position_(position) {}

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// A child stream whose sequence does not overlap with this one.
  RngStream fork(std::uint64_t tag) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t position() const { return position_; }

  bool operator==(const RngStream&) const = default;

 private:
  void refill();

  std::uint64_t key_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t position_ = 0;  // counts 128-bit blocks consumed
  std::array<std::uint32_t, 4> block_{};
  int available_ = 0;
};

}  // namespace cnet
