#include "xlene/synthetic.h"

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "xlene/error.h"
#include "xlene/pipeline.h"
#include "xlene/rng.h"

namespace xlene {

namespace {

constexpr std::size_t kWordsPerNode = 4;
constexpr std::size_t kNoiseWords = 40;
// Relative frequency of each fine label; deliberately imbalanced.
constexpr std::array<std::uint32_t, 7> kFineFrequency = {12, 8, 5, 3, 2, 2, 1};

const char* const kTaxonomy =
    "# synthetic 4-level taxonomy\n"
    "1\t0\tName\n"
    "2\t0\tNatural object\n"
    "1.1\t0\tPerson\n"
    "1.2\t0\tOrganization\n"
    "2.1\t0\tLiving thing\n"
    "1.1.1\t0\tArtist\n"
    "1.1.2\t0\tScientist\n"
    "1.2.1\t0\tCompany\n"
    "2.1.1\t0\tAnimal\n"
    "2.1.2\t0\tPlant\n"
    "1.1.1.1\t1\tPainter\n"
    "1.1.1.2\t1\tMusician\n"
    "1.1.2.1\t1\tPhysicist\n"
    "1.2.1.1\t1\tBank\n"
    "1.2.1.2\t1\tAirline\n"
    "2.1.1.1\t1\tBird\n"
    "2.1.2.1\t1\tTree\n";

class WordMaker {
 public:
  WordMaker(std::string consonants, std::string vowels, Pcg32 rng)
      : consonants_(std::move(consonants)), vowels_(std::move(vowels)), rng_(rng) {}

  std::string next() {
    for (;;) {
      std::string w;
      for (int s = 0; s < 3; ++s) {
        w += consonants_[rng_.bounded(static_cast<std::uint32_t>(consonants_.size()))];
        w += vowels_[rng_.bounded(static_cast<std::uint32_t>(vowels_.size()))];
      }
      if (used_.insert(w).second) return w;
    }
  }

  std::vector<std::string> many(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(next());
    return out;
  }

 private:
  std::string consonants_, vowels_;
  Pcg32 rng_;
  std::set<std::string> used_;
};

struct Lexicon {
  std::map<std::string, std::vector<std::string>> node_words;  // label id -> words
  std::vector<std::string> noise;
};

std::string pick(const std::vector<std::string>& words, Pcg32& rng) {
  return words[rng.bounded(static_cast<std::uint32_t>(words.size()))];
}

}  // namespace

std::string synthetic_taxonomy_tsv() { return kTaxonomy; }

SyntheticCorpus make_synthetic(const SyntheticSpec& spec) {
  if (spec.languages.empty()) throw DataError("synthetic corpus needs a language");
  SyntheticCorpus out;
  out.taxonomy_tsv = kTaxonomy;
  std::istringstream tax(out.taxonomy_tsv);
  out.taxonomy = Taxonomy::load(tax);
  const Taxonomy& t = out.taxonomy;
  auto fine = t.fine_labels();

  Pcg32 root(spec.seed);
  static const char* const kAlphabets[][2] = {
      {"ptkbdg", "aiu"}, {"mnlrsv", "eoy"}, {"fhjwzc", "aeo"}, {"qxtnpr", "iuy"}};

  std::vector<Lexicon> lexicons;
  for (std::size_t li = 0; li < spec.languages.size(); ++li) {
    const auto& alpha = kAlphabets[li % 4];
    WordMaker maker(alpha[0], alpha[1], root.split(100 + li));
    Lexicon lex;
    for (int level = 2; level <= 4; ++level) {
      for (const auto& label : t.labels(level)) lex.node_words[label.id] = maker.many(kWordsPerNode);
    }
    lex.noise = maker.many(kNoiseWords);
    lexicons.push_back(std::move(lex));
  }
  WordMaker neutral("bcdfghklmnprstvz", "aeiou", root.split(99));
  std::vector<std::vector<std::string>> shared_cues;
  for (std::size_t j = 0; j < fine.size(); ++j) shared_cues.push_back(neutral.many(2));

  Pcg32 labels_rng = root.split(1);
  Pcg32 text_rng = root.split(2);
  std::uint32_t total_freq = 0;
  for (auto f : kFineFrequency) total_freq += f;
  auto draw_label = [&]() {
    std::uint32_t r = labels_rng.bounded(total_freq);
    for (std::size_t j = 0; j < kFineFrequency.size(); ++j) {
      if (r < kFineFrequency[j]) return j;
      r -= kFineFrequency[j];
    }
    return kFineFrequency.size() - 1;
  };

  char buf[32];
  for (std::size_t e = 0; e < spec.entities; ++e) {
    std::vector<std::size_t> labels{draw_label()};
    if (labels_rng.uniform_double() < spec.second_label_rate) {
      std::size_t second = draw_label();
      if (second != labels[0]) labels.push_back(second);
    }
    std::snprintf(buf, sizeof buf, "g%05zu", e + 1);
    LinkGroup group{buf, {}};
    std::string name = neutral.next();
    name[0] = static_cast<char>(std::toupper(name[0]));

    for (std::size_t li = 0; li < spec.languages.size(); ++li) {
      const std::string& lang = spec.languages[li];
      const Lexicon& lex = lexicons[li];
      Page page;
      page.language = lang;
      page.page_id = std::to_string(10000 * (li + 1) + e + 1);
      page.title = name;
      std::string text = name;
      for (std::size_t w = 0; w < spec.words_per_doc; ++w) {
        std::size_t label = labels[text_rng.bounded(static_cast<std::uint32_t>(labels.size()))];
        const EneLabel& leaf = fine[label];
        double u = text_rng.uniform_double();
        std::string word;
        if (u < 0.25) {
          word = pick(lex.node_words.at(leaf.id), text_rng);
        } else if (u < 0.40) {
          word = pick(lex.node_words.at(t.ancestors(leaf.id)[2].id), text_rng);
        } else if (u < 0.50) {
          word = pick(lex.node_words.at(t.ancestors(leaf.id)[1].id), text_rng);
        } else if (u < 0.65) {
          std::size_t cue = label;
          if (spec.permute_shared && li > 0) cue = (label + fine.size() - 1) % fine.size();
          word = pick(shared_cues[cue], text_rng);
        } else {
          word = pick(lex.noise, text_rng);
        }
        text += ' ';
        text += word;
      }
      text += '.';
      page.text = text;
      page.opening_text = name + " " + pick(lex.noise, text_rng);
      group.members[lang] = page.page_id;
      std::vector<std::string> ids;
      for (std::size_t j : labels) ids.push_back(fine[j].id);
      out.gold[page.key()] = ids;
      out.pages[lang].push_back(std::move(page));
    }
    out.links.push_back(std::move(group));
  }

  for (std::size_t li = 0; li < spec.languages.size(); ++li) {
    const std::string& lang = spec.languages[li];
    for (std::size_t u = 0; u < spec.unlinked_pages; ++u) {
      Page page;
      page.language = lang;
      page.page_id = std::to_string(10000 * (li + 1) + 9000 + u);
      page.title = neutral.next();
      std::string text;
      for (std::size_t w = 0; w < spec.words_per_doc; ++w) {
        if (w) text += ' ';
        text += pick(lexicons[li].noise, text_rng);
      }
      page.text = text;
      out.pages[lang].push_back(std::move(page));
    }
  }
  return out;
}

void write_gold(std::ostream& out, const GoldLabels& gold) {
  for (const auto& [key, labels] : gold) {
    out << key.lang << '\t' << key.page_id << '\t';
    for (std::size_t i = 0; i < labels.size(); ++i) out << (i ? "," : "") << labels[i];
    out << '\n';
  }
}

void write_links(std::ostream& out, const std::vector<LinkGroup>& links) {
  for (const auto& g : links) {
    for (const auto& [lang, page] : g.members) out << g.group_id << '\t' << lang << '\t' << page << '\n';
  }
}

void write_pages(std::ostream& out, const std::vector<Page>& pages) {
  for (const auto& p : pages) {
    nlohmann::json j;
    j["pageid"] = p.page_id;
    j["lang"] = p.language;
    j["title"] = p.title;
    if (p.text) j["text"] = *p.text;
    if (p.opening_text) j["opening_text"] = *p.opening_text;
    out << j.dump() << '\n';
  }
}

void write_synthetic(const SyntheticCorpus& corpus, const std::string& dir,
                     double test_fraction, std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "pages");
  auto open = [&](const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw DataError("cannot write " + p.string());
    return f;
  };
  {
    auto f = open(fs::path(dir) / "taxonomy.tsv");
    f << corpus.taxonomy_tsv;
  }
  for (const auto& [lang, pages] : corpus.pages) {
    auto f = open(fs::path(dir) / "pages" / (lang + ".jsonl"));
    write_pages(f, pages);
  }
  {
    auto f = open(fs::path(dir) / "gold.tsv");
    write_gold(f, corpus.gold);
  }
  {
    auto f = open(fs::path(dir) / "links.tsv");
    write_links(f, corpus.links);
  }
  auto [train, test] = split_gold(corpus.gold, corpus.links, test_fraction, seed);
  {
    auto f = open(fs::path(dir) / "gold_train.tsv");
    write_gold(f, train);
  }
  {
    auto f = open(fs::path(dir) / "gold_test.tsv");
    write_gold(f, test);
  }
}

}  // namespace xlene
