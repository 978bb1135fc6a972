#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "xlene/corpus.h"

namespace xlene {

// One line of the prediction stream consumed by voting and evaluation:
// {"lang","pageid","labels":[...],"scores":{id:p},"fallback":b}
// plus "voted" and "tally" once voting has run.
struct PredictionRecord {
  std::string lang;
  std::string page_id;
  std::vector<std::string> labels;
  std::map<std::string, double> scores;
  bool fallback = false;
  bool voted = false;
  std::map<std::string, std::uint64_t> tally;

  PageKey key() const { return {lang, page_id}; }
  bool operator==(const PredictionRecord&) const = default;
};

std::string to_json_line(const PredictionRecord& record);
PredictionRecord parse_prediction(const std::string& line);

void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records);
std::vector<PredictionRecord> read_predictions(std::istream& in);
std::vector<PredictionRecord> read_predictions_file(const std::string& path);

// Label sets keyed by page, the shape micro_f1 consumes.
std::map<PageKey, std::vector<std::string>> label_sets(
    const std::vector<PredictionRecord>& records);

}  // namespace xlene
