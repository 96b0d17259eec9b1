#pragma once

// Counter-based random streams.
//
// Every random quantity in the library is drawn from a Stream identified by
// (master_seed, stream_index). The generator is Philox4x64-10: the key is the
// master seed, the 256-bit counter holds the stream index in its upper half
// and the block counter in its lower half, so distinct stream indices walk
// disjoint counter ranges and never overlap.

#include <array>
#include <cstdint>
#include <limits>

namespace csm {

using Philox4x64Counter = std::array<std::uint64_t, 4>;
using Philox4x64Key = std::array<std::uint64_t, 2>;

/// One Philox4x64-10 block: 10 rounds of the bijection keyed by `key`.
Philox4x64Counter philox4x64_10(Philox4x64Counter ctr, Philox4x64Key key);

/// 64-bit finalizer (SplitMix64); used to derive child keys.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct StreamSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  /// Sub-stream `k` of this stream. The child lives under a fresh key derived
  /// from both fields, so children of distinct parents do not collide.
  StreamSpec child(std::uint64_t k) const {
    return {mix64(master_seed ^ mix64(stream_index ^ 0x5851F42D4C957F2DULL)), k};
  }

  friend bool operator==(const StreamSpec&, const StreamSpec&) = default;
};

class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(StreamSpec spec) : spec_(spec) {}
  Stream(std::uint64_t master_seed, std::uint64_t stream_index)
      : Stream(StreamSpec{master_seed, stream_index}) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Unit-rate exponential.
  double exponential();

  /// Uniform integer in [0, bound), bound > 0. Lemire's multiply-shift with
  /// rejection, so the result is exactly uniform.
  std::uint64_t below(std::uint64_t bound);

  /// Number of failures before the first success of Bernoulli(q) trials.
  /// Returns the max value for q <= 0.
  std::uint64_t geometric_failures(double q);

  const StreamSpec& spec() const { return spec_; }
  std::uint64_t blocks_used() const { return block_; }

 private:
  void refill();

  StreamSpec spec_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buf_{};
  int pos_ = 4;
};

}  // namespace csm
