#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace xlene {

inline constexpr int kMaxLevel = 4;

// One ENE category, identified by a dotted path such as "1.7.19.3".
struct EneLabel {
  std::string id;
  std::vector<int> path;
  int level = 0;
  std::string name;
  bool assignable = false;
};

// Parses a dotted identifier. Components must be non-negative decimal
// integers without leading zeros, so that format_label_id inverts it.
EneLabel parse_label_id(std::string_view id);
std::string format_label_id(std::span<const int> path);

// Output sizes of the three vectorized levels. `fine` is the size of the
// assignable label space that the deepest head predicts into.
struct LevelDims {
  std::size_t coarse = 0;  // E2
  std::size_t mid = 0;     // E3
  std::size_t fine = 0;    // assignable labels

  std::size_t operator[](int level) const;
  bool operator==(const LevelDims&) const = default;
};

// Multi-hot targets for E2, E3 and the assignable space. Values are 0/1 for
// gold labels; the training code also accepts relaxed targets in [0, 1].
struct LevelTargets {
  std::vector<float> y2;
  std::vector<float> y3;
  std::vector<float> y4;

  std::vector<float>& level(int i);
  const std::vector<float>& level(int i) const;
};

class Taxonomy {
 public:
  // Reads `id[<TAB>assignable(0|1)][<TAB>name]` records. Without the
  // assignable column a label is assignable iff it sits at level 4.
  static Taxonomy load(std::istream& in);
  static Taxonomy load_file(const std::string& path);

  std::span<const EneLabel> labels(int level) const;
  std::size_t level_size(int level) const { return labels(level).size(); }
  std::array<std::size_t, kMaxLevel> level_sizes() const;
  LevelDims dims() const;

  bool contains(std::string_view id) const;
  const EneLabel& get(std::string_view id) const;
  // Position of the label within its own level.
  std::size_t position(std::string_view id) const;
  std::optional<std::string> parent(std::string_view id) const;
  // Strict prefixes, shallow to deep.
  std::vector<EneLabel> ancestors(std::string_view id) const;

  // Prediction space of the deepest head, in file order.
  std::span<const EneLabel> fine_labels() const { return fine_; }
  std::optional<std::size_t> fine_position(std::string_view id) const;

  LevelTargets encode_targets(std::span<const std::string> ids) const;
  LevelTargets zero_targets() const;

  // FNV-1a over the canonical (id, assignable) sequence; names excluded.
  std::uint64_t content_hash() const { return hash_; }

 private:
  struct Slot {
    int level;
    std::size_t position;
  };
  const Slot& slot(std::string_view id) const;

  std::array<std::vector<EneLabel>, kMaxLevel> by_level_;
  std::vector<EneLabel> fine_;
  std::unordered_map<std::string, Slot> index_;
  std::unordered_map<std::string, std::size_t> fine_index_;
  std::uint64_t hash_ = 0;
};

}  // namespace xlene
