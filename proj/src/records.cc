#include "xlene/records.h"

#include <fstream>
#include <nlohmann/json.hpp>

#include "xlene/error.h"

namespace xlene {

using nlohmann::json;

std::string to_json_line(const PredictionRecord& r) {
  json j;
  j["lang"] = r.lang;
  j["pageid"] = r.page_id;
  j["labels"] = r.labels;
  j["scores"] = r.scores;
  j["fallback"] = r.fallback;
  if (r.voted) {
    j["voted"] = true;
    j["tally"] = r.tally;
  }
  return j.dump();
}

PredictionRecord parse_prediction(const std::string& line) try {
  json j = json::parse(line);
  PredictionRecord r;
  r.lang = j.at("lang").get<std::string>();
  const json& id = j.at("pageid");
  r.page_id = id.is_string() ? id.get<std::string>() : std::to_string(id.get<std::int64_t>());
  r.labels = j.at("labels").get<std::vector<std::string>>();
  if (j.contains("scores")) r.scores = j["scores"].get<std::map<std::string, double>>();
  r.fallback = j.value("fallback", false);
  r.voted = j.value("voted", false);
  if (j.contains("tally")) r.tally = j["tally"].get<std::map<std::string, std::uint64_t>>();
  return r;
} catch (const json::exception& e) {
  throw ParseError(std::string("malformed prediction record: ") + e.what());
}

void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records) {
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

std::vector<PredictionRecord> read_predictions(std::istream& in) {
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_prediction(line));
    } catch (const std::exception& e) {
      throw ParseError("predictions line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<PredictionRecord> read_predictions_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open predictions file: " + path);
  return read_predictions(in);
}

std::map<PageKey, std::vector<std::string>> label_sets(
    const std::vector<PredictionRecord>& records) {
  std::map<PageKey, std::vector<std::string>> out;
  for (const auto& r : records) out[r.key()] = r.labels;
  return out;
}

}  // namespace xlene
