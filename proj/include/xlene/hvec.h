#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xlene/corpus.h"

namespace xlene {

inline constexpr std::uint32_t kHvecVersion = 1;

// Document vectors produced outside this library (e.g. by a transformer).
// Binary: "HVEC", version u32, dim u32, count u64, count*dim f32 (LE).
// Sidecar TSV: `row<TAB>lang<TAB>pageid`.
class PrecomputedVectors {
 public:
  PrecomputedVectors() = default;
  explicit PrecomputedVectors(std::size_t dim) : dim_(dim) {}

  static PrecomputedVectors read(const std::string& bin_path,
                                 const std::string& tsv_path);
  void write(const std::string& bin_path, const std::string& tsv_path) const;

  void add(const PageKey& key, std::span<const float> h);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return keys_.size(); }
  std::optional<std::span<const float>> find(const PageKey& key) const;

 private:
  std::size_t dim_ = 0;
  std::vector<float> data_;
  std::vector<PageKey> keys_;
  std::map<PageKey, std::size_t> rows_;
};

}  // namespace xlene
