#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xlene/corpus.h"

namespace xlene {

struct Metrics {
  std::uint64_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;

  static Metrics from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);
  Metrics& operator+=(const Metrics& other);
};

using LabelSets = std::map<PageKey, std::vector<std::string>>;

struct ScoreOptions {
  // Count labels predicted for pages without gold as false positives.
  bool extra_as_fp = false;
};

// Exact id-string matching, pooled over every gold page.
Metrics micro_f1(const LabelSets& predictions, const GoldLabels& gold,
                 const ScoreOptions& options = {});
std::map<std::string, Metrics> micro_f1_by_language(const LabelSets& predictions,
                                                    const GoldLabels& gold,
                                                    const ScoreOptions& options = {});

// Descending count, ties by id.
std::vector<std::pair<std::string, std::uint64_t>> label_histogram(
    const GoldLabels& gold, std::optional<std::size_t> top_n = std::nullopt);

std::string render_stats_text(const std::vector<StatsRow>& rows);
std::string render_stats_tsv(const std::vector<StatsRow>& rows);

// `config<TAB>lang<TAB>precision<TAB>recall<TAB>f1` rows.
std::string metrics_tsv_row(const std::string& config, const std::string& lang,
                            const Metrics& m);
std::string metrics_tsv_header();

}  // namespace xlene
