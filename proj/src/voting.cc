#include "xlene/voting.h"

#include <algorithm>

#include "xlene/error.h"

namespace xlene {

VoteResult vote(const VoteInput& input, VoteRule rule) {
  if (input.ballots.empty()) {
    throw DataError("vote for group '" + input.group_id + "' has no ballots");
  }
  VoteResult result;
  result.group_id = input.group_id;
  for (const auto& ballot : input.ballots) {
    if (ballot.labels.empty()) {
      throw DataError("empty ballot from '" + ballot.language + "' in group '" +
                      input.group_id + "'");
    }
    std::set<std::string> distinct(ballot.labels.begin(), ballot.labels.end());
    for (const auto& label : distinct) ++result.tally[label];
  }
  std::uint64_t total = 0, top = 0;
  for (const auto& [label, count] : result.tally) {
    total += count;
    top = std::max(top, count);
  }
  const std::uint64_t k = result.tally.size();
  result.mean_numerator = total;
  result.mean_denominator = k;
  for (const auto& [label, count] : result.tally) {
    bool keep = rule == VoteRule::kAtLeastMean ? count * k >= total : count * k > total;
    if (keep) result.chosen.insert(label);
  }
  if (result.chosen.empty()) {
    for (const auto& [label, count] : result.tally) {
      if (count == top) result.chosen.insert(label);
    }
  }
  return result;
}

VotingReport apply_voting(const std::vector<LinkGroup>& links,
                          const std::vector<PredictionRecord>& predictions,
                          const VotingOptions& options) {
  VotingReport report;
  report.records = predictions;
  std::map<PageKey, std::size_t> index;
  for (std::size_t i = 0; i < predictions.size(); ++i) index[predictions[i].key()] = i;

  for (const auto& group : links) {
    VoteInput input{group.group_id, {}};
    std::vector<std::size_t> members;
    for (const auto& [lang, page] : group.members) {
      auto it = index.find(PageKey{lang, page});
      if (it == index.end()) {
        ++report.missing_members;
        continue;
      }
      const auto& labels = predictions[it->second].labels;
      if (labels.empty()) continue;
      input.ballots.push_back({lang, labels});
      members.push_back(it->second);
    }
    if (input.ballots.size() < 2) continue;

    VoteResult result = vote(input, options.rule);
    ++report.groups_voted;
    for (std::size_t i : members) {
      PredictionRecord& r = report.records[i];
      if (options.mode == VoteMode::kOverwrite) {
        r.labels.assign(result.chosen.begin(), result.chosen.end());
      } else {
        std::vector<std::string> kept;
        for (const auto& label : r.labels) {
          if (result.chosen.count(label)) kept.push_back(label);
        }
        if (!kept.empty()) r.labels = std::move(kept);
      }
      r.voted = true;
      r.tally = result.tally;
    }
  }
  return report;
}

}  // namespace xlene
