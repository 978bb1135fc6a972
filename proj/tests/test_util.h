#pragma once

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "xlene/rng.h"
#include "xlene/taxonomy.h"

namespace xlene::test {

inline Taxonomy taxonomy_from(const std::string& text) {
  std::istringstream in(text);
  return Taxonomy::load(in);
}

// Four levels with branching drawn from [1, max_branch]; every level-4
// label is assignable.
inline std::string random_taxonomy_text(Pcg32& rng, int max_branch = 3) {
  std::ostringstream out;
  std::vector<std::string> frontier;
  int roots = 1 + static_cast<int>(rng.bounded(static_cast<std::uint32_t>(max_branch)));
  for (int r = 0; r < roots; ++r) frontier.push_back(std::to_string(r));
  for (int level = 1; level <= 4; ++level) {
    std::vector<std::string> next;
    for (const auto& id : frontier) {
      out << id << '\t' << (level == 4 ? 1 : 0) << '\n';
      if (level == 4) continue;
      int kids = 1 + static_cast<int>(rng.bounded(static_cast<std::uint32_t>(max_branch)));
      for (int k = 0; k < kids; ++k) next.push_back(id + "." + std::to_string(k + 1));
    }
    frontier = std::move(next);
  }
  return out.str();
}

// A compact 4-level tree used across suites: level sizes (2, 3, 5, 7).
inline const char* kSmallTaxonomy =
    "1\n2\n"
    "1.1\n1.2\n2.1\n"
    "1.1.1\n1.1.2\n1.2.1\n2.1.1\n2.1.2\n"
    "1.1.1.1\n1.1.1.2\n1.1.2.1\n1.2.1.1\n1.2.1.2\n2.1.1.1\n2.1.2.1\n";

inline std::set<std::size_t> active(const std::vector<float>& v) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 0.5f) out.insert(i);
  }
  return out;
}

}  // namespace xlene::test
