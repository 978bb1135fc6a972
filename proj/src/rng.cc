#include "xlene/rng.h"

namespace xlene {

Pcg32::Pcg32(std::uint64_t seed, std::uint64_t stream) {
  state_ = 0;
  inc_ = (stream << 1u) | 1u;
  step();
  state_ += seed;
  step();
}

std::uint32_t Pcg32::next_u32() {
  std::uint64_t old = state_;
  step();
  auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
  auto rot = static_cast<std::uint32_t>(old >> 59u);
  return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
}

std::uint64_t Pcg32::next_u64() {
  std::uint64_t hi = next_u32();
  return (hi << 32u) | next_u32();
}

float Pcg32::uniform_float() {
  return static_cast<float>(next_u32() >> 8u) * 0x1.0p-24f;
}

double Pcg32::uniform_double() {
  return static_cast<double>(next_u64() >> 11u) * 0x1.0p-53;
}

std::uint32_t Pcg32::bounded(std::uint32_t bound) {
  if (bound <= 1) return 0;
  // Rejection threshold from the PCG reference implementation.
  std::uint32_t threshold = (0u - bound) % bound;
  for (;;) {
    std::uint32_t r = next_u32();
    if (r >= threshold) return r % bound;
  }
}

Pcg32 Pcg32::split(std::uint64_t stream_id) {
  return Pcg32(next_u64(), stream_id);
}

}  // namespace xlene
