#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xlene/adam.h"
#include "xlene/checkpoint.h"
#include "xlene/corpus.h"
#include "xlene/hvec.h"
#include "xlene/kernels.h"
#include "xlene/records.h"
#include "xlene/taxonomy.h"

namespace xlene {

struct TrainConfig {
  std::size_t max_len = 512;
  std::size_t epochs = 100;
  std::size_t finetune_epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 42;
  double threshold = 0.5;
  std::vector<std::string> languages;  // empty: every language

  bool weighting = true;
  HeadOptions head;
  ContentRule content = ContentRule::kText;

  std::uint32_t vocab = kDefaultVocab;
  std::uint32_t embed_dim = kDefaultEmbedDim;
  std::uint32_t hidden_dim = kDefaultHiddenDim;

  // Early stopping on held-out micro-F1; holdout 0 disables it.
  double holdout = 0.1;
  std::size_t patience = 10;

  int workers = 1;

  // Throws DataError naming the offending field.
  void validate() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, eps}; }
  ModelSpec model_spec(const LevelDims& dims) const;
};

// Hyperparameters used with a fine-tuned transformer encoder.
TrainConfig transformer_preset();

struct LabeledDoc {
  PageKey key;
  std::vector<std::string> gold;
  kernels::Example example;
};

struct Dataset {
  std::vector<LabeledDoc> docs;
  std::size_t dropped_gold = 0;  // gold rows whose page is absent
};

// Pages that have gold labels, in language then file order. Documents come
// from the built-in tokenizer, or from `vectors` when given.
Dataset build_dataset(const std::map<std::string, std::vector<Page>>& pages,
                      const GoldLabels& gold, const Taxonomy& taxonomy,
                      const TrainConfig& config,
                      const PrecomputedVectors* vectors = nullptr);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> holdout_f1;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Stage 1: one model over the shuffled union of every language.
TrainResult train_multilingual(const Dataset& data, const Taxonomy& taxonomy,
                               const TrainConfig& config,
                               const EpochCallback& on_epoch = {});

// Stage 2: continue from `base` on one language with a fresh optimizer.
TrainResult finetune(const Checkpoint& base, const Dataset& data,
                     const std::string& language, const Taxonomy& taxonomy,
                     const TrainConfig& config, const EpochCallback& on_epoch = {});

// Mean loss of the model over a dataset with the given weights.
double dataset_loss(const Model& model, const Dataset& data, const LossWeights& weights);
LossWeights training_weights(const Dataset& data, const Taxonomy& taxonomy, bool weighting);

struct PredictConfig {
  double threshold = 0.5;
  std::size_t max_len = 512;
  ContentRule content = ContentRule::kText;
  int workers = 1;
  ReadMode mode = ReadMode::kStrict;
};

// A verified (checkpoint, taxonomy) pair.
class Predictor {
 public:
  Predictor(const Model& model, std::uint64_t model_taxonomy_hash,
            const Taxonomy& taxonomy, const PredictConfig& config,
            const PrecomputedVectors* vectors = nullptr);

  PredictionRecord predict(const Page& page) const;
  // Order preserving; in skip mode, pages that cannot be scored are counted
  // in `skipped` and omitted.
  std::vector<PredictionRecord> predict_batch(const std::vector<Page>& pages,
                                              std::size_t* skipped = nullptr) const;

  // Threshold sigmoid(logits); top-1 fallback when nothing clears it.
  PredictionRecord from_logits(const PageKey& key, std::span<const double> logits) const;

 private:
  kernels::Example make_example(const Page& page) const;

  const Model& model_;
  const Taxonomy& taxonomy_;
  PredictConfig config_;
  const PrecomputedVectors* vectors_;
};

// Splits gold pages into (train, test) so that pages sharing a link group
// land on the same side.
std::pair<GoldLabels, GoldLabels> split_gold(const GoldLabels& gold,
                                             const std::vector<LinkGroup>& links,
                                             double test_fraction, std::uint64_t seed);

}  // namespace xlene
