#include "hslopes/rng.hpp"

namespace hslopes {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// Domain-separation tags for the counter's upper words.
constexpr std::uint32_t kStateTag = 0x5EED0001u;
constexpr std::uint32_t kSeedTag = 0x5EED0002u;

std::array<std::uint32_t, 2> key_of(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

std::uint64_t join(std::uint32_t hi, std::uint32_t lo) {
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) {
  const auto out = philox4x32({static_cast<std::uint32_t>(tag),
                               static_cast<std::uint32_t>(tag >> 32), 0u, kSeedTag},
                              key_of(parent));
  return join(out[0], out[1]);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id) {
  const auto key = key_of(master_seed);
  const auto lo = static_cast<std::uint32_t>(stream_id);
  const auto hi = static_cast<std::uint32_t>(stream_id >> 32);
  const auto a = philox4x32({lo, hi, 0u, kStateTag}, key);
  const auto b = philox4x32({lo, hi, 1u, kStateTag}, key);
  state_ = {join(a[0], a[1]), join(a[2], a[3]), join(b[0], b[1]), join(b[2], b[3])};
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

RngStream RngStream::child(std::uint64_t index) const {
  return RngStream(derive_seed(derive_seed(master_seed_, stream_id_), index), 0);
}

}  // namespace hslopes
