#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace hslopes {

/// Philox4x32-10 block function: a keyed bijection of a 128-bit counter.
///
/// Used to turn a (master seed, stream id) pair into generator state; being a
/// bijection in the counter for a fixed key, distinct stream ids always map to
/// distinct states.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Derive an independent 64-bit seed from a parent seed and a tag.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag);

/// A reproducible random stream identified by (master_seed, stream_id).
///
/// The engine is xoshiro256++; its 256-bit state is the Philox image of the
/// stream id under the master-seed key. Same pair, same bits.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal variate (ziggurat).
  double normal() { return normal_(*this); }

  /// Child stream, independent of this one and of other children.
  RngStream child(std::uint64_t index) const;

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
  boost::random::normal_distribution<double> normal_;
};

/// Stream for replica `replica` of a run seeded with `master_seed`.
inline RngStream spawn_stream(std::uint64_t master_seed, std::uint64_t replica) {
  return RngStream(master_seed, replica);
}

}  // namespace hslopes
