#include <doctest.h>

#include <sstream>

#include "xlene/error.h"
#include "xlene/evaluation.h"
#include "xlene/records.h"
#include "xlene/rng.h"

using namespace xlene;

TEST_CASE("micro F1 examples") {
  GoldLabels gold{{{"en", "1"}, {"A"}}};
  LabelSets pred{{{"en", "1"}, {"A", "B"}}};
  auto m = micro_f1(pred, gold);
  CHECK(m.precision == 0.5);
  CHECK(m.recall == 1.0);
  CHECK(std::abs(m.f1 - 2.0 / 3.0) < 1e-12);

  CHECK(micro_f1(LabelSets(gold.begin(), gold.end()), gold).f1 == 1.0);

  GoldLabels g2{{{"en", "1"}, {"A"}}, {{"en", "2"}, {"C", "D"}}};
  LabelSets p2{{{"en", "1"}, {"A"}}, {{"en", "2"}, {"B", "C"}}};
  auto w = micro_f1(p2, g2);
  CHECK(w.tp == 2);
  CHECK(w.fp == 1);
  CHECK(w.fn == 1);
  CHECK(std::abs(w.precision - 2.0 / 3.0) < 1e-12);
  CHECK(std::abs(w.recall - 2.0 / 3.0) < 1e-12);
  CHECK(std::abs(w.f1 - 2.0 / 3.0) < 1e-12);
}

TEST_CASE("micro F1 edge cases") {
  GoldLabels gold{{{"en", "1"}, {"A"}}};
  LabelSets none;
  auto m = micro_f1(none, gold);
  CHECK(m.fn == 1);
  CHECK(m.precision == 0.0);
  CHECK(m.f1 == 0.0);

  LabelSets extra{{{"en", "1"}, {"A"}}, {{"en", "9"}, {"B", "C"}}};
  CHECK(micro_f1(extra, gold).fp == 0);
  CHECK(micro_f1(extra, gold, {true}).fp == 2);

  auto by = micro_f1_by_language(
      LabelSets{{{"en", "1"}, {"A"}}, {{"fr", "1"}, {"B"}}},
      GoldLabels{{{"en", "1"}, {"A"}}, {{"fr", "1"}, {"C"}}});
  CHECK(by.at("en").f1 == 1.0);
  CHECK(by.at("fr").f1 == 0.0);
}

TEST_CASE("micro F1 against a recount") {
  Pcg32 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    GoldLabels gold;
    LabelSets pred;
    std::size_t pages = rng.bounded(51);
    for (std::size_t p = 0; p < pages; ++p) {
      PageKey key{rng.bounded(2) ? "en" : "fr", std::to_string(p)};
      std::vector<std::string> g, q;
      for (int l = 0; l < 10; ++l) {
        if (rng.bounded(4) == 0) g.push_back("L" + std::to_string(l));
        if (rng.bounded(4) == 0) q.push_back("L" + std::to_string(l));
      }
      if (!g.empty()) gold[key] = g;
      if (rng.bounded(5)) pred[key] = q;
    }
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (const auto& [key, g] : gold) {
      std::vector<std::string> q;
      if (auto it = pred.find(key); it != pred.end()) q = it->second;
      for (const auto& l : q) {
        (std::find(g.begin(), g.end(), l) != g.end() ? tp : fp) += 1;
      }
      for (const auto& l : g) {
        if (std::find(q.begin(), q.end(), l) == q.end()) ++fn;
      }
    }
    auto m = micro_f1(pred, gold);
    CHECK(m.tp == tp);
    CHECK(m.fp == fp);
    CHECK(m.fn == fn);
    if (m.precision > 0 && m.recall > 0) {
      CHECK(m.f1 >= std::min(m.precision, m.recall) - 1e-15);
      CHECK(m.f1 <= std::max(m.precision, m.recall) + 1e-15);
    }
  }
}

TEST_CASE("label histogram") {
  GoldLabels gold{{{"en", "1"}, {"A"}}, {{"en", "2"}, {"A", "B"}}};
  auto h = label_histogram(gold);
  CHECK(h == std::vector<std::pair<std::string, std::uint64_t>>{{"A", 2}, {"B", 1}});
  CHECK(label_histogram({}).empty());
  GoldLabels ties{{{"en", "1"}, {"C", "B"}}, {{"en", "2"}, {"A"}}};
  auto t = label_histogram(ties, 2);
  CHECK(t == std::vector<std::pair<std::string, std::uint64_t>>{{"A", 1}, {"B", 1}});
}

TEST_CASE("metrics TSV") {
  CHECK(metrics_tsv_header() == "config\tlang\tprecision\trecall\tf1");
  CHECK(metrics_tsv_row("flat", "en", Metrics::from_counts(2, 1, 1)) ==
        "flat\ten\t0.666667\t0.666667\t0.666667");
}

TEST_CASE("prediction records round trip") {
  PredictionRecord r;
  r.lang = "en";
  r.page_id = "12";
  r.labels = {"1.1", "1.2"};
  r.scores = {{"1.1", 0.75}, {"1.2", 0.5}, {"1.3", 0.125}};
  r.fallback = false;
  auto back = parse_prediction(to_json_line(r));
  CHECK(back == r);
  r.voted = true;
  r.tally = {{"1.1", 2}};
  CHECK(parse_prediction(to_json_line(r)) == r);
  CHECK_THROWS_AS(parse_prediction("{\"lang\": 1}"), DataError);

  std::stringstream s;
  write_predictions(s, {r, back});
  std::istringstream in(s.str());
  auto all = read_predictions(in);
  REQUIRE(all.size() == 2);
  CHECK(label_sets(all).at({"en", "12"}) == r.labels);
}
