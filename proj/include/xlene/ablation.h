#pragma once

#include <map>
#include <string>
#include <vector>

#include "xlene/corpus.h"
#include "xlene/evaluation.h"
#include "xlene/pipeline.h"
#include "xlene/taxonomy.h"

namespace xlene {

struct AblationInput {
  const std::map<std::string, std::vector<Page>>& pages;
  const GoldLabels& train_gold;
  const GoldLabels& test_gold;
  const std::vector<LinkGroup>& links;
  const Taxonomy& taxonomy;
};

struct AblationRow {
  std::string name;
  std::map<std::string, Metrics> by_language;
  Metrics average;  // unweighted mean over languages of P, R and F1
  bool failed = false;
  std::string error;
};

// Rows in fixed order: flat, +hierarchy, +weighting, +voting.
struct AblationReport {
  std::vector<AblationRow> rows;

  std::string to_text() const;
  std::string to_tsv() const;
};

inline const std::vector<std::string> kAblationRows = {"flat", "+hierarchy", "+weighting",
                                                       "+voting"};

// Every configuration runs the multilingual stage, per-language fine-tuning
// and thresholded prediction of the test pages under the same seed.
AblationReport run_ablation(const AblationInput& input, const TrainConfig& config);

}  // namespace xlene
