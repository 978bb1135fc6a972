#include "xlene/ablation.h"

#include <cstdio>
#include <set>
#include <sstream>

#include "xlene/voting.h"

namespace xlene {

namespace {

std::vector<PredictionRecord> three_stage(const AblationInput& in, const TrainConfig& config) {
  Dataset train = build_dataset(in.pages, in.train_gold, in.taxonomy, config);
  TrainResult base = train_multilingual(train, in.taxonomy, config);

  std::set<std::string> languages;
  for (const auto& [key, labels] : in.test_gold) languages.insert(key.lang);

  std::vector<PredictionRecord> predictions;
  for (const auto& lang : languages) {
    bool has_train = false;
    for (const auto& d : train.docs) has_train |= d.key.lang == lang;
    Checkpoint mono = has_train
        ? finetune(base.checkpoint, train, lang, in.taxonomy, config).checkpoint
        : base.checkpoint;

    std::vector<Page> test_pages;
    auto it = in.pages.find(lang);
    if (it != in.pages.end()) {
      for (const auto& p : it->second) {
        if (in.test_gold.count(p.key())) test_pages.push_back(p);
      }
    }
    PredictConfig pc{config.threshold, config.max_len, config.content, config.workers,
                     ReadMode::kStrict};
    Predictor predictor(mono.model, mono.taxonomy_hash, in.taxonomy, pc);
    auto out = predictor.predict_batch(test_pages);
    predictions.insert(predictions.end(), out.begin(), out.end());
  }
  return predictions;
}

AblationRow score(const std::string& name, const std::vector<PredictionRecord>& predictions,
                  const GoldLabels& gold) {
  AblationRow row;
  row.name = name;
  row.by_language = micro_f1_by_language(label_sets(predictions), gold);
  if (row.by_language.empty()) return row;
  double p = 0, r = 0, f = 0;
  for (const auto& [lang, m] : row.by_language) {
    p += m.precision;
    r += m.recall;
    f += m.f1;
  }
  const double n = static_cast<double>(row.by_language.size());
  row.average.precision = p / n;
  row.average.recall = r / n;
  row.average.f1 = f / n;
  return row;
}

}  // namespace

AblationReport run_ablation(const AblationInput& input, const TrainConfig& config) {
  struct Variant {
    HeadKind kind;
    bool weighting;
  };
  const Variant variants[] = {
      {HeadKind::kFlat, false}, {HeadKind::kHierarchical, false}, {HeadKind::kHierarchical, true}};

  AblationReport report;
  std::vector<PredictionRecord> weighted;
  bool weighted_ok = false;
  for (std::size_t v = 0; v < 3; ++v) {
    TrainConfig c = config;
    c.head.kind = variants[v].kind;
    c.weighting = variants[v].weighting;
    try {
      auto predictions = three_stage(input, c);
      report.rows.push_back(score(kAblationRows[v], predictions, input.test_gold));
      if (v == 2) {
        weighted = std::move(predictions);
        weighted_ok = true;
      }
    } catch (const std::exception& e) {
      AblationRow row;
      row.name = kAblationRows[v];
      row.failed = true;
      row.error = e.what();
      report.rows.push_back(std::move(row));
    }
  }
  if (weighted_ok) {
    auto voted = apply_voting(input.links, weighted).records;
    report.rows.push_back(score(kAblationRows[3], voted, input.test_gold));
  } else {
    AblationRow row;
    row.name = kAblationRows[3];
    row.failed = true;
    row.error = "the +weighting configuration failed";
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string AblationReport::to_text() const {
  std::ostringstream out;
  std::set<std::string> languages;
  for (const auto& row : rows) {
    for (const auto& [lang, m] : row.by_language) languages.insert(lang);
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-12s", "config");
  out << buf;
  for (const auto& lang : languages) {
    std::snprintf(buf, sizeof buf, "  %7s", lang.c_str());
    out << buf;
  }
  out << "  average\n";
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%-12s", row.name.c_str());
    out << buf;
    if (row.failed) {
      out << "  FAILED: " << row.error << '\n';
      continue;
    }
    for (const auto& lang : languages) {
      auto it = row.by_language.find(lang);
      std::snprintf(buf, sizeof buf, "  %7.2f", it == row.by_language.end() ? 0.0 : 100 * it->second.f1);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "  %7.2f\n", 100 * row.average.f1);
    out << buf;
  }
  return out.str();
}

std::string AblationReport::to_tsv() const {
  std::ostringstream out;
  out << metrics_tsv_header() << '\n';
  for (const auto& row : rows) {
    if (row.failed) continue;
    for (const auto& [lang, m] : row.by_language) out << metrics_tsv_row(row.name, lang, m) << '\n';
    out << metrics_tsv_row(row.name, "avg", row.average) << '\n';
  }
  return out.str();
}

}  // namespace xlene
