#include "xlene/pipeline.h"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "xlene/error.h"
#include "xlene/evaluation.h"
#include "xlene/hash.h"
#include "xlene/rng.h"

namespace xlene {

namespace {

constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamHoldout = 2;
constexpr std::uint64_t kStreamShuffle = 3;
constexpr std::uint64_t kStreamSplit = 4;

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw DataError("invalid config: " + what); };
  if (max_len < 3) fail("max_len must be >= 3");
  if (!(threshold > 0.0 && threshold < 1.0)) fail("threshold must be in (0, 1)");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) fail("betas must be in [0, 1)");
  if (!(eps > 0.0)) fail("eps must be > 0");
  if (!(holdout >= 0.0 && holdout < 1.0)) fail("holdout must be in [0, 1)");
  if (vocab < 3 || embed_dim == 0 || hidden_dim == 0) fail("encoder dimensions must be positive");
  if (workers < 1) fail("workers must be >= 1");
}

ModelSpec TrainConfig::model_spec(const LevelDims& dims) const {
  ModelSpec spec;
  spec.vocab = vocab;
  spec.embed_dim = embed_dim;
  spec.hidden_dim = hidden_dim;
  spec.dims = dims;
  spec.head = head;
  return spec;
}

TrainConfig transformer_preset() {
  TrainConfig c;
  c.learning_rate = 2e-5;
  c.batch_size = 45;
  c.epochs = 100;
  c.max_len = 512;
  c.threshold = 0.5;
  c.eps = 1e-8;
  return c;
}

namespace {

bool language_selected(const TrainConfig& config, const std::string& lang) {
  return config.languages.empty() ||
         std::find(config.languages.begin(), config.languages.end(), lang) !=
             config.languages.end();
}

std::vector<std::string> threshold_labels(const Taxonomy& taxonomy,
                                          std::span<const double> logits, double eps,
                                          bool* fallback) {
  auto fine = taxonomy.fine_labels();
  std::vector<std::string> labels;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (sigmoid(logits[j]) >= eps) labels.push_back(fine[j].id);
  }
  *fallback = false;
  if (labels.empty() && !logits.empty()) {
    auto best = std::max_element(logits.begin(), logits.end()) - logits.begin();
    labels.push_back(fine[best].id);
    *fallback = true;
  }
  return labels;
}

LossWeights weights_for(const std::vector<const LabeledDoc*>& docs, const Taxonomy& taxonomy,
                        bool weighting) {
  const LevelDims dims = taxonomy.dims();
  if (!weighting) return unit_weights(dims);
  std::vector<LevelTargets> targets;
  targets.reserve(docs.size());
  for (const auto* d : docs) targets.push_back(d->example.targets);
  LevelCounts c = count_labels(targets, dims);
  return compute_weights(c.c2, c.c3, c.c4);
}

struct Snapshot {
  ModelParams params;
  AdamState adam;
};

TrainResult run_training(Model model, AdamState adam, std::vector<const LabeledDoc*> docs,
                         const Taxonomy& taxonomy, const TrainConfig& config,
                         std::size_t epochs, std::uint64_t stream,
                         nlohmann::json metadata, const EpochCallback& on_epoch) {
  Pcg32 root(config.seed, stream);
  std::vector<const LabeledDoc*> holdout;
  if (config.holdout > 0.0 && docs.size() >= 2) {
    Pcg32 rng = root.split(kStreamHoldout);
    rng.shuffle(docs);
    auto n = static_cast<std::size_t>(std::llround(config.holdout * docs.size()));
    n = std::clamp<std::size_t>(n, 1, docs.size() - 1);
    holdout.assign(docs.end() - n, docs.end());
    docs.resize(docs.size() - n);
  }

  const LossWeights weights = weights_for(docs, taxonomy, config.weighting);

  std::vector<const kernels::Example*> examples;
  for (const auto* d : docs) examples.push_back(&d->example);
  std::vector<const kernels::Example*> holdout_examples;
  GoldLabels holdout_gold;
  for (const auto* d : holdout) {
    holdout_examples.push_back(&d->example);
    holdout_gold[d->key] = d->gold;
  }

  TrainResult result;
  std::optional<Snapshot> best;
  double best_f1 = -1.0;
  Pcg32 shuffler = root.split(kStreamShuffle);

  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    shuffler.shuffle(examples);
    double total = 0.0;
    for (std::size_t start = 0; start < examples.size(); start += config.batch_size) {
      std::size_t end = std::min(examples.size(), start + config.batch_size);
      std::span<const kernels::Example* const> batch(examples.data() + start, end - start);
      auto g = kernels::batch_gradients_parallel(model, batch, weights, config.workers);
      if (!std::isfinite(g.loss)) {
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
      }
      total += g.loss * static_cast<double>(batch.size());
      adam_step(model.params, g.grads, adam, config.workers);
    }
    EpochLog log{epoch, total / static_cast<double>(examples.size()), std::nullopt};

    if (!holdout.empty()) {
      auto logits = kernels::fine_logits_parallel(model, holdout_examples, config.workers);
      LabelSets predicted;
      for (std::size_t i = 0; i < holdout.size(); ++i) {
        bool fallback = false;
        predicted[holdout[i]->key] =
            threshold_labels(taxonomy, logits[i], config.threshold, &fallback);
      }
      double f1 = micro_f1(predicted, holdout_gold).f1;
      log.holdout_f1 = f1;
      if (f1 > best_f1) {
        best_f1 = f1;
        best = Snapshot{model.params, adam};
        result.best_epoch = epoch;
      }
    } else {
      result.best_epoch = epoch;
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
    if (!holdout.empty() && epoch - result.best_epoch >= config.patience) break;
  }
  if (best) {
    model.params = std::move(best->params);
    adam = std::move(best->adam);
  }

  metadata["epochs_run"] = result.log.size();
  metadata["best_epoch"] = result.best_epoch;
  metadata["seed"] = config.seed;
  metadata["train_docs"] = docs.size();
  metadata["holdout_docs"] = holdout.size();
  metadata["weighting"] = config.weighting;
  metadata["max_len"] = config.max_len;
  metadata["content"] = config.content == ContentRule::kText ? "text" : "opening+text";
  metadata["threshold"] = config.threshold;
  result.checkpoint = Checkpoint{taxonomy.content_hash(), std::move(model), std::move(adam),
                                 metadata.dump()};
  return result;
}

}  // namespace

Dataset build_dataset(const std::map<std::string, std::vector<Page>>& pages,
                      const GoldLabels& gold, const Taxonomy& taxonomy,
                      const TrainConfig& config, const PrecomputedVectors* vectors) {
  Dataset data;
  std::set<PageKey> present;
  for (const auto& [lang, list] : pages) {
    if (!language_selected(config, lang)) continue;
    for (const auto& page : list) {
      present.insert(page.key());
      auto it = gold.find(page.key());
      if (it == gold.end()) continue;
      LabeledDoc doc;
      doc.key = page.key();
      doc.gold = it->second;
      for (const auto& id : doc.gold) {
        if (!taxonomy.contains(id)) {
          throw DataError("gold label '" + id + "' for " + lang + ":" + page.page_id +
                          " is not in the taxonomy");
        }
      }
      doc.example.targets = taxonomy.encode_targets(doc.gold);
      if (vectors) {
        auto h = vectors->find(doc.key);
        if (!h) {
          throw DataError("no precomputed vector for " + lang + ":" + page.page_id);
        }
        doc.example.fixed_h.assign(h->begin(), h->end());
      } else {
        doc.example.tokens =
            tokenize(main_content(page, config.content), config.max_len, config.vocab);
      }
      data.docs.push_back(std::move(doc));
    }
  }
  for (const auto& [key, labels] : gold) {
    if (language_selected(config, key.lang) && !present.count(key)) ++data.dropped_gold;
  }
  return data;
}

LossWeights training_weights(const Dataset& data, const Taxonomy& taxonomy, bool weighting) {
  std::vector<const LabeledDoc*> docs;
  for (const auto& d : data.docs) docs.push_back(&d);
  return weights_for(docs, taxonomy, weighting);
}

double dataset_loss(const Model& model, const Dataset& data, const LossWeights& weights) {
  if (data.docs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& d : data.docs) {
    auto h = kernels::document_vector(model, d.example);
    total += loss(forward(h, model.params.head, model.spec.head), d.example.targets, weights);
  }
  return total / static_cast<double>(data.docs.size());
}

TrainResult train_multilingual(const Dataset& data, const Taxonomy& taxonomy,
                               const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (data.docs.empty()) throw DataError("no labeled pages to train on");
  ModelSpec spec = config.model_spec(taxonomy.dims());
  if (!data.docs.front().example.fixed_h.empty()) {
    spec.vocab = 0;
    spec.embed_dim = 0;
    spec.hidden_dim = static_cast<std::uint32_t>(data.docs.front().example.fixed_h.size());
  }
  Model model = init_model(spec, Pcg32(config.seed).split(kStreamInit).next_u64());
  AdamState adam = make_adam_state(model.params, config.adam());

  std::vector<const LabeledDoc*> docs;
  std::set<std::string> languages;
  for (const auto& d : data.docs) {
    docs.push_back(&d);
    languages.insert(d.key.lang);
  }
  nlohmann::json meta;
  meta["stage"] = "multilingual";
  meta["languages"] = languages;
  return run_training(std::move(model), std::move(adam), std::move(docs), taxonomy, config,
                      config.epochs, 0, meta, on_epoch);
}

TrainResult finetune(const Checkpoint& base, const Dataset& data, const std::string& language,
                     const Taxonomy& taxonomy, const TrainConfig& config,
                     const EpochCallback& on_epoch) {
  config.validate();
  if (base.taxonomy_hash != taxonomy.content_hash() ||
      base.model.spec.dims != taxonomy.dims()) {
    throw DataError("base checkpoint was trained on a different taxonomy (hash mismatch)");
  }
  if (base.model.spec.has_encoder() && config.vocab != base.model.spec.vocab) {
    throw DataError("vocabulary size " + std::to_string(config.vocab) +
                    " differs from the base checkpoint's " +
                    std::to_string(base.model.spec.vocab));
  }
  std::vector<const LabeledDoc*> docs;
  for (const auto& d : data.docs) {
    if (d.key.lang == language) docs.push_back(&d);
  }
  if (docs.empty()) throw DataError("no labeled pages for language '" + language + "'");

  Model model = base.model;
  AdamState adam = make_adam_state(model.params, config.adam());
  nlohmann::json meta;
  meta["stage"] = "finetune";
  meta["language"] = language;
  return run_training(std::move(model), std::move(adam), std::move(docs), taxonomy, config,
                      config.finetune_epochs, fnv1a64(language), meta, on_epoch);
}

Predictor::Predictor(const Model& model, std::uint64_t model_taxonomy_hash,
                     const Taxonomy& taxonomy, const PredictConfig& config,
                     const PrecomputedVectors* vectors)
    : model_(model), taxonomy_(taxonomy), config_(config), vectors_(vectors) {
  if (model_taxonomy_hash != taxonomy.content_hash() || model.spec.dims != taxonomy.dims()) {
    throw DataError("checkpoint was trained on a different taxonomy (hash mismatch)");
  }
  if (!(config.threshold > 0.0 && config.threshold < 1.0)) {
    throw DataError("invalid config: threshold must be in (0, 1)");
  }
  if (!model.spec.has_encoder() && !vectors) {
    throw DataError("checkpoint consumes precomputed vectors; none were supplied");
  }
}

kernels::Example Predictor::make_example(const Page& page) const {
  if (page.page_id.empty() || page.language.empty()) {
    throw DataError("page without id or language");
  }
  kernels::Example ex;
  if (!model_.spec.has_encoder()) {
    auto h = vectors_->find(page.key());
    if (!h) throw DataError("no precomputed vector for " + page.language + ":" + page.page_id);
    ex.fixed_h.assign(h->begin(), h->end());
    return ex;
  }
  std::string content = main_content(page, config_.content);
  if (content.empty()) {
    throw DataError("page " + page.language + ":" + page.page_id + " has no content");
  }
  ex.tokens = tokenize(content, config_.max_len, model_.spec.vocab);
  return ex;
}

PredictionRecord Predictor::from_logits(const PageKey& key, std::span<const double> logits) const {
  PredictionRecord r;
  r.lang = key.lang;
  r.page_id = key.page_id;
  auto fine = taxonomy_.fine_labels();
  for (std::size_t j = 0; j < logits.size(); ++j) r.scores[fine[j].id] = sigmoid(logits[j]);
  r.labels = threshold_labels(taxonomy_, logits, config_.threshold, &r.fallback);
  return r;
}

PredictionRecord Predictor::predict(const Page& page) const {
  kernels::Example ex = make_example(page);
  const kernels::Example* one[] = {&ex};
  auto logits = kernels::fine_logits_serial(model_, one);
  return from_logits(page.key(), logits.front());
}

std::vector<PredictionRecord> Predictor::predict_batch(const std::vector<Page>& pages,
                                                       std::size_t* skipped) const {
  std::vector<kernels::Example> examples(pages.size());
  std::vector<std::string> errors(pages.size());
  const auto n = static_cast<std::ptrdiff_t>(pages.size());
#pragma omp parallel for num_threads(config_.workers) schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      examples[i] = make_example(pages[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      if (errors[i].empty()) errors[i] = "unscorable page";
    }
  }
  std::vector<const kernels::Example*> ok;
  std::vector<std::size_t> index;
  std::size_t skips = 0;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    if (errors[i].empty()) {
      ok.push_back(&examples[i]);
      index.push_back(i);
      continue;
    }
    if (config_.mode == ReadMode::kStrict) {
      throw DataError("page '" + pages[i].page_id + "': " + errors[i]);
    }
    ++skips;
  }
  if (skipped) *skipped = skips;
  auto logits = kernels::fine_logits_parallel(model_, ok, config_.workers);
  std::vector<PredictionRecord> out;
  out.reserve(ok.size());
  for (std::size_t k = 0; k < ok.size(); ++k) {
    out.push_back(from_logits(pages[index[k]].key(), logits[k]));
  }
  return out;
}

std::pair<GoldLabels, GoldLabels> split_gold(const GoldLabels& gold,
                                             const std::vector<LinkGroup>& links,
                                             double test_fraction, std::uint64_t seed) {
  std::map<PageKey, std::string> unit_of;
  for (const auto& group : links) {
    for (const auto& [lang, page] : group.members) {
      unit_of.emplace(PageKey{lang, page}, "g:" + group.group_id);
    }
  }
  std::map<std::string, std::vector<PageKey>> units;
  for (const auto& [key, labels] : gold) {
    auto it = unit_of.find(key);
    std::string unit = it != unit_of.end() ? it->second : "p:" + key.lang + ":" + key.page_id;
    units[unit].push_back(key);
  }
  std::vector<std::string> names;
  for (const auto& [name, keys] : units) names.push_back(name);
  Pcg32 rng = Pcg32(seed).split(kStreamSplit);
  rng.shuffle(names);
  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * names.size()));
  std::pair<GoldLabels, GoldLabels> out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    GoldLabels& side = i < n_test ? out.second : out.first;
    for (const auto& key : units[names[i]]) side[key] = gold.at(key);
  }
  return out;
}

}  // namespace xlene
