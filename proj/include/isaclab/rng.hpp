#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "isaclab/common.hpp"

namespace isaclab {

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3"). Chosen so every Monte Carlo draw is
// addressable by (seed, trial, stream, index): trials parallelize without
// shared state and draws are bit-reproducible across platforms.
struct Philox4x32 {
  using Counter = std::array<uint32_t, 4>;
  using Key = std::array<uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    constexpr uint32_t kMul0 = 0xD2511F53u;
    constexpr uint32_t kMul1 = 0xCD9E8D57u;
    constexpr uint32_t kW0 = 0x9E3779B9u;
    constexpr uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const uint64_t p0 = static_cast<uint64_t>(kMul0) * ctr[0];
      const uint64_t p1 = static_cast<uint64_t>(kMul1) * ctr[2];
      const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
      const uint32_t lo0 = static_cast<uint32_t>(p0);
      const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
      const uint32_t lo1 = static_cast<uint32_t>(p1);
      ctr = Counter{hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }
};

// Stream purposes used by the simulator. Entity-scoped streams carry the
// entity index in the high bits so draws stay aligned when only the array
// size N changes between runs (common random numbers across sweep points).
enum class StreamPurpose : uint32_t {
  kChannelBsRis = 1,
  kChannelBsUser = 2,
  kChannelRisUser = 3,
  kCommSymbols = 4,
  kChipSigns = 5,
  kNoiseStatic = 6,
  kNoiseThermal1 = 7,
  kNoiseThermal2 = 8,
  kGaussianRandomization = 9,
  kNoiseVarianceSim = 10,
};

// One addressable substream: (seed, trial, purpose, entity). Draws can be
// taken sequentially or at an explicit index.
class SubStream {
 public:
  SubStream(uint64_t seed, uint32_t trial, StreamPurpose purpose, uint32_t entity = 0)
      : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
        trial_(trial),
        stream_id_(static_cast<uint32_t>(purpose) | (entity << 8)) {}

  // 64 uniform bits for draw `index`.
  uint64_t bits_at(uint64_t index) const {
    Philox4x32::Counter ctr{trial_, stream_id_, static_cast<uint32_t>(index),
                            static_cast<uint32_t>(index >> 32)};
    const auto out = Philox4x32::block(ctr, key_);
    return (static_cast<uint64_t>(out[0]) << 32) | out[1];
  }

  // Uniform on (0, 1), never exactly 0 or 1.
  double uniform_at(uint64_t index) const {
    return (static_cast<double>(bits_at(index) >> 11) + 0.5) * 0x1p-53;
  }

  // Standard complex Gaussian CN(0,1): unit total variance, real and
  // imaginary parts each with variance 1/2.
  cplx cn_at(uint64_t index) const {
    Philox4x32::Counter ctr{trial_, stream_id_, static_cast<uint32_t>(index),
                            static_cast<uint32_t>(index >> 32)};
    const auto out = Philox4x32::block(ctr, key_);
    const uint64_t w1 = (static_cast<uint64_t>(out[0]) << 32) | out[1];
    const uint64_t w2 = (static_cast<uint64_t>(out[2]) << 32) | out[3];
    const double u1 = (static_cast<double>(w1 >> 11) + 0.5) * 0x1p-53;
    const double u2 = (static_cast<double>(w2 >> 11) + 0.5) * 0x1p-53;
    const double r = std::sqrt(-std::log(u1));
    return cplx(r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2));
  }

  double uniform() { return uniform_at(next_++); }
  cplx cn() { return cn_at(next_++); }
  double sign() { return uniform() < 0.5 ? -1.0 : 1.0; }

 private:
  Philox4x32::Key key_;
  uint32_t trial_;
  uint32_t stream_id_;
  uint64_t next_ = 0;
};

}  // namespace isaclab
