#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xlene/corpus.h"
#include "xlene/taxonomy.h"

namespace xlene {

// Generator for a small labeled multi-language corpus over a fixed
// 4-level taxonomy with (E2, E3, E4) sizes (3, 5, 7).
struct SyntheticSpec {
  std::vector<std::string> languages{"xa", "xb"};
  std::size_t entities = 100;        // one linked page per language each
  std::size_t unlinked_pages = 10;   // unlabeled, unlinked pages per language
  std::size_t words_per_doc = 24;
  double second_label_rate = 0.2;
  // Words shared by all languages point at label j in the first language and
  // at label (j + 1) mod 7 elsewhere.
  bool permute_shared = true;
  std::uint64_t seed = 42;
};

struct SyntheticCorpus {
  std::string taxonomy_tsv;
  Taxonomy taxonomy;
  std::map<std::string, std::vector<Page>> pages;
  GoldLabels gold;
  std::vector<LinkGroup> links;
};

std::string synthetic_taxonomy_tsv();
SyntheticCorpus make_synthetic(const SyntheticSpec& spec);

// Writes taxonomy.tsv, pages/<lang>.jsonl, gold.tsv, links.tsv and a
// link-group-respecting gold_train.tsv / gold_test.tsv split.
void write_synthetic(const SyntheticCorpus& corpus, const std::string& dir,
                     double test_fraction, std::uint64_t seed);

void write_gold(std::ostream& out, const GoldLabels& gold);
void write_links(std::ostream& out, const std::vector<LinkGroup>& links);
void write_pages(std::ostream& out, const std::vector<Page>& pages);

}  // namespace xlene
