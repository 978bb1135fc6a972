#include "xlene/evaluation.h"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace xlene {

Metrics Metrics::from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  Metrics m{tp, fp, fn, 0.0, 0.0, 0.0};
  if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (m.precision + m.recall > 0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

Metrics& Metrics::operator+=(const Metrics& other) {
  *this = from_counts(tp + other.tp, fp + other.fp, fn + other.fn);
  return *this;
}

namespace {

Metrics score_page(const std::vector<std::string>* pred, const std::vector<std::string>& gold) {
  std::set<std::string> g(gold.begin(), gold.end());
  std::set<std::string> p;
  if (pred) p.insert(pred->begin(), pred->end());
  std::uint64_t tp = 0;
  for (const auto& label : p) tp += g.count(label);
  return {tp, p.size() - tp, g.size() - tp};
}

template <typename Sink>
void fold(const LabelSets& predictions, const GoldLabels& gold,
          const ScoreOptions& options, Sink&& sink) {
  for (const auto& [key, labels] : gold) {
    auto it = predictions.find(key);
    sink(key, score_page(it == predictions.end() ? nullptr : &it->second, labels));
  }
  if (!options.extra_as_fp) return;
  for (const auto& [key, labels] : predictions) {
    if (gold.count(key)) continue;
    std::set<std::string> p(labels.begin(), labels.end());
    sink(key, Metrics{0, p.size(), 0});
  }
}

}  // namespace

Metrics micro_f1(const LabelSets& predictions, const GoldLabels& gold,
                 const ScoreOptions& options) {
  std::uint64_t tp = 0, fp = 0, fn = 0;
  fold(predictions, gold, options, [&](const PageKey&, const Metrics& m) {
    tp += m.tp;
    fp += m.fp;
    fn += m.fn;
  });
  return Metrics::from_counts(tp, fp, fn);
}

std::map<std::string, Metrics> micro_f1_by_language(const LabelSets& predictions,
                                                    const GoldLabels& gold,
                                                    const ScoreOptions& options) {
  std::map<std::string, Metrics> out;
  fold(predictions, gold, options,
       [&](const PageKey& key, const Metrics& m) { out[key.lang] += m; });
  return out;
}

std::vector<std::pair<std::string, std::uint64_t>> label_histogram(
    const GoldLabels& gold, std::optional<std::size_t> top_n) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& [key, labels] : gold) {
    for (const auto& label : labels) ++counts[label];
  }
  std::vector<std::pair<std::string, std::uint64_t>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  if (top_n && out.size() > *top_n) out.resize(*top_n);
  return out;
}

namespace {

std::string with_commas(std::uint64_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  int n = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (n && n % 3 == 0) out += ',';
    out += *it;
    ++n;
  }
  return {out.rbegin(), out.rend()};
}

std::string tenths(std::uint64_t t) {
  return std::to_string(t / 10) + "." + std::to_string(t % 10);
}

}  // namespace

std::string render_stats_text(const std::vector<StatsRow>& rows) {
  std::size_t w_lang = 8, w_pages = 5, w_linked = 6;
  for (const auto& r : rows) {
    w_lang = std::max(w_lang, r.language.size());
    w_pages = std::max(w_pages, with_commas(r.pages).size());
    w_linked = std::max(w_linked, with_commas(r.linked).size());
  }
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %*s  %*s  %6s\n", static_cast<int>(w_lang),
                "Language", static_cast<int>(w_pages), "Pages",
                static_cast<int>(w_linked), "Linked", "Ratio");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %*s  %*s  %6s\n", static_cast<int>(w_lang),
                  r.language.c_str(), static_cast<int>(w_pages),
                  with_commas(r.pages).c_str(), static_cast<int>(w_linked),
                  with_commas(r.linked).c_str(), tenths(r.ratio_tenths).c_str());
    out << buf;
  }
  return out.str();
}

std::string render_stats_tsv(const std::vector<StatsRow>& rows) {
  std::ostringstream out;
  out << "lang\tpages\tlinked\tratio\n";
  for (const auto& r : rows) {
    out << r.language << '\t' << r.pages << '\t' << r.linked << '\t'
        << tenths(r.ratio_tenths) << '\n';
  }
  return out.str();
}

std::string metrics_tsv_header() { return "config\tlang\tprecision\trecall\tf1"; }

std::string metrics_tsv_row(const std::string& config, const std::string& lang,
                            const Metrics& m) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.6f\t%.6f\t%.6f", m.precision, m.recall, m.f1);
  return config + '\t' + lang + '\t' + buf;
}

}  // namespace xlene
