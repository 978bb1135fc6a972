#include "xlene/cli.h"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>

#include "xlene/ablation.h"
#include "xlene/checkpoint.h"
#include "xlene/corpus.h"
#include "xlene/error.h"
#include "xlene/evaluation.h"
#include "xlene/gradcheck.h"
#include "xlene/hvec.h"
#include "xlene/pipeline.h"
#include "xlene/records.h"
#include "xlene/synthetic.h"
#include "xlene/taxonomy.h"
#include "xlene/voting.h"

namespace xlene {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err) {}
  template <typename... Args>
  void operator()(const Args&... args) const {
    err_ << "[xlene] ";
    (err_ << ... << args);
    err_ << '\n';
  }

 private:
  std::ostream& err_;
};

void require_paths(std::initializer_list<const std::string*> paths) {
  for (const std::string* p : paths) {
    if (!p->empty() && !fs::exists(*p)) throw DataError("path does not exist: " + *p);
  }
}

// Writes to `path`, or to `fallback` when the path is empty.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw DataError("cannot write output file: " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

template <typename E>
E parse_choice(const std::string& flag, const std::string& value,
               std::initializer_list<std::pair<const char*, E>> choices) {
  for (const auto& [name, e] : choices) {
    if (value == name) return e;
  }
  throw CLI::ValidationError(flag, "unsupported value '" + value + "'");
}

struct TrainFlags {
  TrainConfig config;
  std::string head = "hierarchical";
  std::string feedback = "logits";
  std::string content = "text";
  std::string preset = "reference";
  const CLI::App* active = nullptr;

  bool given(const std::string& name) const { return active && active->count(name) > 0; }

  void add(CLI::App* sub) {
    sub->add_option("--max-len", config.max_len, "Maximum framed sequence length");
    sub->add_option("--epochs", config.epochs, "Stage-1 epochs");
    sub->add_option("--finetune-epochs", config.finetune_epochs, "Stage-2 epochs");
    sub->add_option("--batch-size", config.batch_size, "Documents per update");
    sub->add_option("--lr", config.learning_rate, "Adam learning rate");
    sub->add_option("--beta1", config.beta1);
    sub->add_option("--beta2", config.beta2);
    sub->add_option("--eps", config.eps, "Adam epsilon");
    sub->add_option("--seed", config.seed, "Root random seed");
    sub->add_option("--threshold", config.threshold, "Sigmoid threshold for label assignment");
    sub->add_option("--languages", config.languages, "Restrict to these language codes");
    sub->add_option("--weighting", config.weighting, "Frequency-weighted loss (true|false)");
    sub->add_option("--head", head, "hierarchical|flat");
    sub->add_option("--feedback", feedback, "logits|sigmoid");
    sub->add_option("--content", content, "text|opening+text");
    sub->add_option("--vocab", config.vocab, "Hash vocabulary size");
    sub->add_option("--embed-dim", config.embed_dim);
    sub->add_option("--hidden-dim", config.hidden_dim);
    sub->add_option("--holdout", config.holdout, "Early-stopping holdout fraction (0 disables)");
    sub->add_option("--patience", config.patience, "Epochs without holdout gain before stopping");
    sub->add_option("--workers", config.workers, "Worker threads");
    sub->add_option("--preset", preset, "reference|transformer");
  }

  void finalize() {
    config.head.kind = parse_choice<HeadKind>(
        "--head", head, {{"hierarchical", HeadKind::kHierarchical}, {"flat", HeadKind::kFlat}});
    config.head.feedback = parse_choice<Feedback>(
        "--feedback", feedback, {{"logits", Feedback::kLogits}, {"sigmoid", Feedback::kSigmoid}});
    config.content = parse_choice<ContentRule>(
        "--content", content,
        {{"text", ContentRule::kText}, {"opening+text", ContentRule::kOpeningPlusText}});
    bool transformer = parse_choice<bool>("--preset", preset,
                                          {{"reference", false}, {"transformer", true}});
    if (transformer) {
      TrainConfig p = transformer_preset();
      if (!given("--lr")) config.learning_rate = p.learning_rate;
      if (!given("--batch-size")) config.batch_size = p.batch_size;
    }
  }

  // Settings that shape the input fall back to the base checkpoint's.
  void inherit(const Checkpoint& base) {
    if (!given("--vocab") && base.model.spec.has_encoder()) config.vocab = base.model.spec.vocab;
    json meta = json::parse(base.metadata.empty() ? "{}" : base.metadata, nullptr, false);
    if (!meta.is_object()) return;
    if (!given("--max-len")) config.max_len = meta.value("max_len", config.max_len);
    if (!given("--threshold")) config.threshold = meta.value("threshold", config.threshold);
    if (!given("--content") && meta.value("content", "") == "opening+text") {
      config.content = ContentRule::kOpeningPlusText;
    }
  }
};

struct DataFlags {
  std::string taxonomy, pages, gold, links, vectors, vectors_index;
  bool skip_bad = false;

  ReadMode mode() const { return skip_bad ? ReadMode::kSkip : ReadMode::kStrict; }

  std::optional<PrecomputedVectors> load_vectors() const {
    if (vectors.empty()) return std::nullopt;
    if (vectors_index.empty()) throw DataError("--vectors requires --vectors-index");
    return PrecomputedVectors::read(vectors, vectors_index);
  }
};

void add_vector_flags(CLI::App* sub, DataFlags& d) {
  sub->add_option("--vectors", d.vectors, "Precomputed document vectors (HVEC)");
  sub->add_option("--vectors-index", d.vectors_index, "Row -> (lang, pageid) sidecar TSV");
}

std::string epoch_line(const EpochLog& e) {
  char buf[128];
  if (e.holdout_f1) {
    std::snprintf(buf, sizeof buf, "epoch %zu loss %.6f holdout-f1 %.4f", e.epoch,
                  e.train_loss, *e.holdout_f1);
  } else {
    std::snprintf(buf, sizeof buf, "epoch %zu loss %.6f", e.epoch, e.train_loss);
  }
  return buf;
}

// Splices config-file values in as arguments right after the subcommand,
// skipping keys the command line already sets.
std::vector<std::string> with_config(const CLI::App& app, std::vector<std::string> args,
                                     const Log& log) {
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  std::ifstream in(config_path);
  if (!in) throw DataError("cannot open config file: " + config_path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("config file " + config_path + ": " + e.what());
  }
  if (!cfg.is_object()) throw ParseError("config file must hold one flat object");

  std::size_t sub_pos = 0;
  const CLI::App* sub = nullptr;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (!args[i].empty() && args[i][0] != '-') {
      for (const CLI::App* s : app.get_subcommands({})) {
        if (s->get_name() == args[i]) {
          sub = s;
          sub_pos = i;
        }
      }
      break;
    }
  }
  if (!sub) return args;

  auto given = [&](const std::string& flag) {
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  std::vector<std::string> injected;
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (key == "config") continue;
    if (!sub->get_option_no_throw(flag)) {
      log("config key '", key, "' does not apply to '", sub->get_name(), "', ignored");
      continue;
    }
    if (given(flag)) continue;
    auto scalar = [](const json& v) {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
      return v.dump();
    };
    if (value.is_array()) {
      for (const auto& v : value) injected.push_back(flag + "=" + scalar(v));
    } else if (value.is_object() || value.is_null()) {
      throw ParseError("config key '" + key + "' must be a scalar or a list");
    } else {
      injected.push_back(flag + "=" + scalar(value));
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, injected.begin(),
              injected.end());
  return args;
}

std::string checkpoint_summary(const Checkpoint& c) {
  const ModelSpec& s = c.model.spec;
  return "levels (" + std::to_string(s.dims.coarse) + ", " + std::to_string(s.dims.mid) + ", " +
         std::to_string(s.dims.fine) + "), d_h " + std::to_string(s.hidden_dim);
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Log log(err);
  CLI::App app{"Cross-lingual hierarchical ENE classification of Wikipedia pages", "xlene"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print tool and file-format versions");
  std::string config_path;
  app.add_option("--config", config_path, "Flat JSON object of option values")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.fallthrough();

  DataFlags data;
  TrainFlags train_flags;
  std::string out_path, tsv_path, base_path, language, pred_path;
  std::vector<std::string> checkpoint_specs;
  std::size_t top_n = 0;
  bool strict_vote = false;
  std::string vote_mode = "overwrite", score_extra = "ignore", eval_name = "eval";
  double test_fraction = 0.25;
  std::uint64_t seed = 7;
  std::size_t seeds = 1;
  std::size_t entities = 100;
  bool no_permute = false;
  std::optional<double> threshold;
  std::optional<std::size_t> max_len;
  int workers = 1;

  auto* stats = app.add_subcommand("stats", "Per-language page and link counts");
  stats->add_option("--pages", data.pages, "Page file or directory")->required();
  stats->add_option("--links", data.links, "Link group TSV")->required();
  stats->add_option("--tsv", tsv_path, "Also write the table as TSV");
  stats->add_flag("--skip-bad", data.skip_bad, "Skip malformed page records");

  auto* histogram = app.add_subcommand("histogram", "Gold label frequencies");
  histogram->add_option("--gold", data.gold, "Gold label TSV")->required();
  histogram->add_option("--top", top_n, "Keep only the N most frequent labels");
  histogram->add_option("--out", out_path, "Output TSV (default stdout)");

  auto* train = app.add_subcommand("train", "Stage 1: multilingual training");
  train->add_option("--taxonomy", data.taxonomy, "Taxonomy definition file")->required();
  train->add_option("--pages", data.pages, "Page file or directory")->required();
  train->add_option("--gold", data.gold, "Gold label TSV")->required();
  train->add_option("--out", out_path, "Checkpoint to write")->required();
  train->add_flag("--skip-bad", data.skip_bad, "Skip malformed page records");
  add_vector_flags(train, data);
  train_flags.add(train);

  auto* ft = app.add_subcommand("finetune", "Stage 2: fine-tune a checkpoint on one language");
  ft->add_option("--taxonomy", data.taxonomy)->required();
  ft->add_option("--pages", data.pages)->required();
  ft->add_option("--gold", data.gold)->required();
  ft->add_option("--base", base_path, "Stage-1 checkpoint")->required();
  ft->add_option("--lang", language, "Language to fine-tune on")->required();
  ft->add_option("--out", out_path, "Checkpoint to write")->required();
  ft->add_flag("--skip-bad", data.skip_bad, "Skip malformed page records");
  add_vector_flags(ft, data);
  train_flags.add(ft);

  auto* predict = app.add_subcommand("predict", "Threshold fine-grained labels for pages");
  predict->add_option("--taxonomy", data.taxonomy)->required();
  predict->add_option("--pages", data.pages)->required();
  predict->add_option("--checkpoint", checkpoint_specs,
                      "PATH for every language, or LANG=PATH (repeatable)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  predict->add_option("--languages", train_flags.config.languages, "Restrict to these languages");
  predict->add_option("--threshold", threshold, "Sigmoid threshold (default from checkpoint)");
  predict->add_option("--max-len", max_len, "Sequence length (default from checkpoint)");
  predict->add_option("--content", train_flags.content, "text|opening+text");
  predict->add_option("--workers", workers, "Worker threads");
  predict->add_option("--out", out_path, "Prediction records (default stdout)");
  predict->add_flag("--skip-bad", data.skip_bad, "Skip pages that cannot be scored");
  add_vector_flags(predict, data);

  auto* vote_cmd = app.add_subcommand("vote", "Stage 3: cross-lingual voting");
  vote_cmd->add_option("--links", data.links)->required();
  vote_cmd->add_option("--pred", pred_path, "Prediction records")->required();
  vote_cmd->add_option("--out", out_path, "Voted records (default stdout)");
  vote_cmd->add_flag("--strict-vote", strict_vote, "Require count > mean instead of >=");
  vote_cmd->add_option("--vote", vote_mode, "overwrite|advisory");

  auto* eval = app.add_subcommand("eval", "Micro-averaged precision, recall and F1");
  eval->add_option("--gold", data.gold)->required();
  eval->add_option("--pred", pred_path)->required();
  eval->add_option("--score-extra", score_extra, "ignore|fp: predictions for non-gold pages");
  eval->add_option("--name", eval_name, "Config name written in the TSV");
  eval->add_option("--tsv", tsv_path, "Write config/lang/P/R/F1 TSV here");

  auto* ablate = app.add_subcommand("ablate", "Four-configuration ablation");
  ablate->add_option("--taxonomy", data.taxonomy)->required();
  ablate->add_option("--pages", data.pages)->required();
  ablate->add_option("--gold", data.gold)->required();
  ablate->add_option("--links", data.links)->required();
  ablate->add_option("--test-fraction", test_fraction, "Share of link groups held out");
  ablate->add_option("--tsv", tsv_path, "Write config/lang/P/R/F1 TSV here");
  train_flags.add(ablate);

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  gradcheck->add_option("--seed", seed, "First seed");
  gradcheck->add_option("--seeds", seeds, "Number of consecutive seeds");
  gradcheck->add_option("--head", train_flags.head, "hierarchical|flat");
  gradcheck->add_option("--feedback", train_flags.feedback, "logits|sigmoid");

  auto* synth = app.add_subcommand("synth", "Write the synthetic two-language fixture");
  synth->add_option("--out", out_path, "Directory to create")->required();
  synth->add_option("--seed", seed, "Generator seed");
  synth->add_option("--entities", entities, "Linked entities");
  synth->add_option("--test-fraction", test_fraction, "Share of link groups in gold_test.tsv");
  synth->add_flag("--no-permute", no_permute, "Keep shared cue words consistent across languages");

  std::vector<std::string> args;
  try {
    args = with_config(app, raw_args, log);
  } catch (const DataError& e) {
    log("error: ", e.what());
    return 2;
  }
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  if (show_version) {
    out << "xlene " << kToolVersion << " (checkpoint format " << kCheckpointVersion
        << ", vector format " << kHvecVersion << ")\n";
    return 0;
  }
  if (app.get_subcommands().empty()) {
    err << app.help();
    return 1;
  }

  try {
    for (const CLI::App* sub : {train, ft, ablate, gradcheck}) {
      if (sub->parsed()) train_flags.active = sub;
    }
    if (train_flags.active) train_flags.finalize();

    if (stats->parsed()) {
      require_paths({&data.pages, &data.links});
      PageIndex index;
      auto counts = for_each_page(data.pages, data.mode(),
                                  [&](Page&& p) { index[p.language].insert(p.page_id); });
      if (counts.empty || counts.malformed) {
        log("skipped ", counts.empty, " empty and ", counts.malformed, " malformed records");
      }
      auto rows = corpus_stats(index, load_links_file(data.links));
      out << render_stats_text(rows);
      if (!tsv_path.empty()) {
        Output tsv(tsv_path, out);
        *tsv << render_stats_tsv(rows);
      }
      return 0;
    }

    if (histogram->parsed()) {
      require_paths({&data.gold});
      auto hist = label_histogram(load_gold_file(data.gold),
                                  top_n ? std::optional<std::size_t>(top_n) : std::nullopt);
      Output o(out_path, out);
      *o << "label\tcount\n";
      for (const auto& [label, count] : hist) *o << label << '\t' << count << '\n';
      return 0;
    }

    if (train->parsed() || ft->parsed()) {
      require_paths({&data.taxonomy, &data.pages, &data.gold, &data.vectors,
                     &data.vectors_index, &base_path});
      Taxonomy taxonomy = Taxonomy::load_file(data.taxonomy);
      auto pages = read_pages_path(data.pages, data.mode());
      GoldLabels gold = load_gold_file(data.gold);
      auto vectors = data.load_vectors();
      std::optional<Checkpoint> base;
      if (ft->parsed()) {
        base = load_checkpoint(base_path, taxonomy.content_hash());
        train_flags.inherit(*base);
      }
      const TrainConfig& config = train_flags.config;
      config.validate();
      Dataset dataset =
          build_dataset(pages, gold, taxonomy, config, vectors ? &*vectors : nullptr);
      if (dataset.dropped_gold) {
        log("dropped ", dataset.dropped_gold, " gold rows whose page is not in the dump");
      }
      log(dataset.docs.size(), " labeled pages");
      auto on_epoch = [&](const EpochLog& e) { log(epoch_line(e)); };
      TrainResult result;
      if (train->parsed()) {
        result = train_multilingual(dataset, taxonomy, config, on_epoch);
      } else {
        result = finetune(*base, dataset, language, taxonomy, config, on_epoch);
      }
      save_checkpoint(out_path, result.checkpoint);
      log("wrote ", out_path, ": ", checkpoint_summary(result.checkpoint), ", best epoch ",
          result.best_epoch);
      return 0;
    }

    if (predict->parsed()) {
      require_paths({&data.taxonomy, &data.pages, &data.vectors, &data.vectors_index});
      std::map<std::string, std::string> by_lang;
      std::string fallback_path;
      for (const auto& spec : checkpoint_specs) {
        auto eq = spec.find('=');
        if (eq == std::string::npos) {
          fallback_path = spec;
        } else {
          by_lang[spec.substr(0, eq)] = spec.substr(eq + 1);
        }
      }
      for (const auto& [lang, path] : by_lang) require_paths({&path});
      require_paths({&fallback_path});

      Taxonomy taxonomy = Taxonomy::load_file(data.taxonomy);
      auto pages = read_pages_path(data.pages, data.mode());
      auto vectors = data.load_vectors();
      ContentRule content = parse_choice<ContentRule>(
          "--content", train_flags.content,
          {{"text", ContentRule::kText}, {"opening+text", ContentRule::kOpeningPlusText}});

      std::map<std::string, Checkpoint> loaded;
      Output o(out_path, out);
      std::size_t total = 0, skipped_total = 0;
      const auto& only = train_flags.config.languages;
      for (const auto& [lang, list] : pages) {
        if (!only.empty() && std::find(only.begin(), only.end(), lang) == only.end()) continue;
        auto it = by_lang.find(lang);
        const std::string& path = it != by_lang.end() ? it->second : fallback_path;
        if (path.empty()) throw DataError("no checkpoint given for language '" + lang + "'");
        if (!loaded.count(path)) {
          loaded.emplace(path, load_checkpoint(path, taxonomy.content_hash()));
        }
        const Checkpoint& ckpt = loaded.at(path);
        json meta = json::parse(ckpt.metadata.empty() ? "{}" : ckpt.metadata, nullptr, false);
        if (meta.is_discarded()) meta = json::object();
        PredictConfig pc;
        pc.threshold = threshold.value_or(meta.value("threshold", 0.5));
        pc.max_len = max_len.value_or(meta.value("max_len", std::size_t{512}));
        pc.content = content;
        pc.workers = workers;
        pc.mode = data.mode();
        Predictor predictor(ckpt.model, ckpt.taxonomy_hash, taxonomy, pc,
                            vectors ? &*vectors : nullptr);
        std::size_t skipped = 0;
        auto records = predictor.predict_batch(list, &skipped);
        write_predictions(*o, records);
        total += records.size();
        skipped_total += skipped;
      }
      log("predicted ", total, " pages", skipped_total ? ", skipped " : "",
          skipped_total ? std::to_string(skipped_total) : std::string());
      return 0;
    }

    if (vote_cmd->parsed()) {
      require_paths({&data.links, &pred_path});
      VotingOptions options;
      options.rule = strict_vote ? VoteRule::kAboveMean : VoteRule::kAtLeastMean;
      options.mode = parse_choice<VoteMode>(
          "--vote", vote_mode, {{"overwrite", VoteMode::kOverwrite}, {"advisory", VoteMode::kAdvisory}});
      auto report = apply_voting(load_links_file(data.links), read_predictions_file(pred_path),
                                 options);
      Output o(out_path, out);
      write_predictions(*o, report.records);
      log("voted in ", report.groups_voted, " groups; ", report.missing_members,
          " linked pages had no prediction");
      return 0;
    }

    if (eval->parsed()) {
      require_paths({&data.gold, &pred_path});
      ScoreOptions options;
      options.extra_as_fp = parse_choice<bool>("--score-extra", score_extra,
                                               {{"ignore", false}, {"fp", true}});
      GoldLabels gold = load_gold_file(data.gold);
      LabelSets predictions = label_sets(read_predictions_file(pred_path));
      Metrics all = micro_f1(predictions, gold, options);
      auto by_lang = micro_f1_by_language(predictions, gold, options);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%-6s %8s %8s %8s %8s %8s %8s\n", "lang", "P", "R", "F1",
                    "tp", "fp", "fn");
      out << buf;
      auto line = [&](const std::string& lang, const Metrics& m) {
        std::snprintf(buf, sizeof buf, "%-6s %8.4f %8.4f %8.4f %8llu %8llu %8llu\n", lang.c_str(),
                      m.precision, m.recall, m.f1, static_cast<unsigned long long>(m.tp),
                      static_cast<unsigned long long>(m.fp), static_cast<unsigned long long>(m.fn));
        out << buf;
      };
      for (const auto& [lang, m] : by_lang) line(lang, m);
      line("all", all);
      if (!tsv_path.empty()) {
        Output tsv(tsv_path, out);
        *tsv << metrics_tsv_header() << '\n';
        for (const auto& [lang, m] : by_lang) *tsv << metrics_tsv_row(eval_name, lang, m) << '\n';
        *tsv << metrics_tsv_row(eval_name, "all", all) << '\n';
      }
      return 0;
    }

    if (ablate->parsed()) {
      require_paths({&data.taxonomy, &data.pages, &data.gold, &data.links});
      Taxonomy taxonomy = Taxonomy::load_file(data.taxonomy);
      auto pages = read_pages_path(data.pages, data.mode());
      GoldLabels gold = load_gold_file(data.gold);
      auto links = load_links_file(data.links);
      auto [train_gold, test_gold] =
          split_gold(gold, links, test_fraction, train_flags.config.seed);
      log("ablation: ", train_gold.size(), " training and ", test_gold.size(), " test pages");
      AblationReport report = run_ablation(
          AblationInput{pages, train_gold, test_gold, links, taxonomy}, train_flags.config);
      out << report.to_text();
      if (!tsv_path.empty()) {
        Output tsv(tsv_path, out);
        *tsv << report.to_tsv();
      }
      for (const auto& row : report.rows) {
        if (row.failed) return 2;
      }
      return 0;
    }

    if (gradcheck->parsed()) {
      GradCheckOptions options;
      options.head = train_flags.config.head;
      double worst = 0.0;
      bool ok = true;
      for (std::size_t i = 0; i < seeds; ++i) {
        GradCheckResult r = gradient_check(seed + i, options);
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "seed %llu: max relative error %.3e, max absolute error %.3e over %zu "
                      "entries%s\n",
                      static_cast<unsigned long long>(seed + i), r.max_rel_error,
                      r.max_abs_error, r.checked, r.passed() ? "" : " FAILED");
        out << buf;
        worst = std::max(worst, r.max_rel_error);
        ok = ok && r.passed();
      }
      char buf[80];
      std::snprintf(buf, sizeof buf, "max relative error %.3e\n", worst);
      out << buf;
      return ok ? 0 : 3;
    }

    if (synth->parsed()) {
      SyntheticSpec spec;
      spec.seed = seed;
      spec.entities = entities;
      spec.permute_shared = !no_permute;
      write_synthetic(make_synthetic(spec), out_path, test_fraction, seed);
      log("wrote synthetic fixture to ", out_path);
      return 0;
    }
  } catch (const CLI::Error& e) {
    err << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    log("numeric failure: ", e.what());
    return 3;
  } catch (const std::exception& e) {
    log("error: ", e.what());
    return 2;
  }
  return 1;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace xlene
