#pragma once

#include <cstdint>
#include <vector>

namespace xlene {

// PCG32 (XSH-RR variant, O'Neill 2014) with the reference multiplier
// 6364136223846793005 and pcg32_srandom seeding. split() derives an
// independent generator so that every consumer of randomness draws from
// its own stream, all rooted in one 64-bit seed.
class Pcg32 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;

  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0x853c49e6748fea9bULL);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform in [0, 1) with 24 bits of mantissa.
  float uniform_float();
  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform_double();
  // Unbiased integer in [0, bound).
  std::uint32_t bounded(std::uint32_t bound);

  Pcg32 split(std::uint64_t stream_id);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = bounded(static_cast<std::uint32_t>(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  void step() { state_ = state_ * kMultiplier + inc_; }

  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
};

}  // namespace xlene
