#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "xlene/adam.h"
#include "xlene/model.h"

namespace xlene {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout (all little-endian):
//   "HMCN" | version u32 | taxonomy hash u64
//   dims: vocab, embed_dim, hidden_dim, d2, d3, d_fine, head kind, feedback (u32 each)
//   9 tensors as f32, row-major, in kTensorNames order (shapes implied by dims)
//   optimizer flag u32; if 1: step u64, lr, beta1, beta2, eps (f64),
//     first moments then second moments, same order and encoding as tensors
//   metadata byte length u32 | metadata bytes (JSON text)
struct Checkpoint {
  std::uint64_t taxonomy_hash = 0;
  Model model;
  std::optional<AdamState> optimizer;
  std::string metadata;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);

// Throws DataError on bad magic, version, truncation, or when
// `expected_hash` is given and differs from the stored taxonomy hash.
Checkpoint read_checkpoint(std::istream& in,
                           std::optional<std::uint64_t> expected_hash = std::nullopt);
Checkpoint load_checkpoint(const std::string& path,
                           std::optional<std::uint64_t> expected_hash = std::nullopt);

}  // namespace xlene
