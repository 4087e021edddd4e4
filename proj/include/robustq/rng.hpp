#pragma once

#include <array>
#include <cstdint>

namespace robustq {

/// Philox4x32-10 block function (Salmon et al., SC'11): a keyed bijection
/// on 128-bit counters. Any (key, counter) pair can be evaluated
/// independently, so substreams need no shared state.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeylA;
        key[1] += kWeylB;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMulA = 0xD2511F53;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57;
  static constexpr std::uint32_t kWeylA = 0x9E3779B9;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85;
};

/// Identifies one independent random stream: the master seed selects the
/// Philox key, (lane, step, slot) fill three counter words and the fourth
/// word counts blocks within the stream. Lanes typically index
/// trajectories or replications, steps index operator draws within a lane,
/// slots index (s, a, reward|transition) cells.
struct StreamId {
  std::uint64_t seed = 0;
  std::uint32_t lane = 0;
  std::uint32_t step = 0;
  std::uint32_t slot = 0;
};

/// Sequential uniform generator over one StreamId.
class Substream {
 public:
  explicit Substream(const StreamId& id)
      : key_{static_cast<std::uint32_t>(id.seed), static_cast<std::uint32_t>(id.seed >> 32)},
        lane_(id.lane), step_(id.step), slot_(id.slot) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    if (pos_ == 2) refill();
    const std::uint64_t hi = buffer_[2 * pos_];
    const std::uint64_t lo = buffer_[2 * pos_ + 1];
    ++pos_;
    return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
  }

 private:
  void refill() {
    buffer_ = Philox4x32::block({block_++, slot_, step_, lane_}, key_);
    pos_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t lane_;
  std::uint32_t step_;
  std::uint32_t slot_;
  std::uint32_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int pos_ = 2;
};

}  // namespace robustq
