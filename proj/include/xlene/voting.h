#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "xlene/corpus.h"
#include "xlene/records.h"

namespace xlene {

struct Ballot {
  std::string language;
  std::vector<std::string> labels;
};

struct VoteInput {
  std::string group_id;
  std::vector<Ballot> ballots;
};

enum class VoteRule {
  kAtLeastMean,  // count >= mean
  kAboveMean,    // count > mean; falls back to the maximal labels if none qualify
};

struct VoteResult {
  std::string group_id;
  std::set<std::string> chosen;
  std::map<std::string, std::uint64_t> tally;
  // Mean count over distinct labels as the exact fraction total / distinct.
  std::uint64_t mean_numerator = 0;
  std::uint64_t mean_denominator = 1;
};

// Each ballot contributes one count per distinct label it names. The
// comparison count >= total / distinct is done as count * distinct >= total.
VoteResult vote(const VoteInput& input, VoteRule rule = VoteRule::kAtLeastMean);

enum class VoteMode {
  kOverwrite,  // every voting member receives the chosen set
  kAdvisory,   // members keep own labels that the vote also chose
};

struct VotingOptions {
  VoteRule rule = VoteRule::kAtLeastMean;
  VoteMode mode = VoteMode::kOverwrite;
};

struct VotingReport {
  std::vector<PredictionRecord> records;  // input order preserved
  std::size_t groups_voted = 0;
  std::size_t missing_members = 0;  // group members without a prediction
};

VotingReport apply_voting(const std::vector<LinkGroup>& links,
                          const std::vector<PredictionRecord>& predictions,
                          const VotingOptions& options = {});

}  // namespace xlene
