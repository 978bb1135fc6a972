#pragma once

#include <cstdint>
#include <string>

#include "xlene/hmcn.h"
#include "xlene/taxonomy.h"

namespace xlene {

struct GradCheckOptions {
  double delta = 1e-4;
  double rel_tol = 1e-4;
  double abs_tol = 1e-6;
  // Entries smaller than this are left out of max_rel_error.
  double report_floor = 1e-3;
  std::uint32_t vocab = 48;
  std::uint32_t embed_dim = 6;
  std::uint32_t hidden_dim = 8;
  LevelDims dims{3, 5, 7};
  std::size_t docs = 4;
  std::size_t max_tokens = 12;
  HeadOptions head;
};

struct GradCheckResult {
  std::size_t checked = 0;
  std::size_t failures = 0;
  // Largest relative error among entries of magnitude >= report_floor.
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst_tensor;

  bool passed() const { return failures == 0; }
};

// Compares every analytic gradient of a random encoder+head model against
// central differences of the batch loss.
GradCheckResult gradient_check(std::uint64_t seed, const GradCheckOptions& options = {});

}  // namespace xlene
