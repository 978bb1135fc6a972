#include "xlene/corpus.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "xlene/error.h"
#include "xlene/taxonomy.h"

namespace xlene {

namespace fs = std::filesystem;
using nlohmann::json;

std::string main_content(const Page& page, ContentRule rule) {
  std::string body =
      page.text && !page.text->empty() ? *page.text : page.title;
  if (rule == ContentRule::kOpeningPlusText && page.opening_text &&
      !page.opening_text->empty()) {
    return *page.opening_text + "\n" + body;
  }
  return body;
}

PageReader::PageReader(std::istream& in, std::string default_language,
                       ReadMode mode)
    : in_(in), default_language_(std::move(default_language)), mode_(mode) {}

namespace {

std::optional<std::string> string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  throw ParseError(std::string("field '") + key + "' has unexpected type");
}

}  // namespace

bool PageReader::next(Page& page) {
  while (std::getline(in_, line_)) {
    ++line_no_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    if (line_.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      json obj = json::parse(line_);
      if (!obj.is_object()) throw ParseError("record is not an object");
      Page p;
      auto id = string_field(obj, "pageid");
      if (!id || id->empty()) throw ParseError("missing pageid");
      p.page_id = *id;
      p.language = string_field(obj, "lang").value_or(default_language_);
      if (p.language.empty()) throw ParseError("missing lang");
      p.title = string_field(obj, "title").value_or("");
      p.text = string_field(obj, "text");
      p.opening_text = string_field(obj, "opening_text");
      bool has_text = p.text && !p.text->empty();
      if (p.title.empty() && !has_text) {
        ++empty_;
        continue;
      }
      // The title doubles as fallback content, so keep one around.
      if (p.title.empty()) p.title = p.page_id;
      page = std::move(p);
      return true;
    } catch (const std::exception& e) {
      if (mode_ == ReadMode::kStrict) {
        throw ParseError("pages line " + std::to_string(line_no_) + ": " +
                         e.what());
      }
      ++malformed_;
    }
  }
  return false;
}

std::vector<Page> read_pages(std::istream& in, const std::string& language,
                             ReadMode mode) {
  PageReader reader(in, language, mode);
  std::vector<Page> out;
  Page p;
  while (reader.next(p)) out.push_back(std::move(p));
  return out;
}

ReadCounts for_each_page(const std::string& path, ReadMode mode,
                         const std::function<void(Page&&)>& visit) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path)) {
    files.emplace_back(path);
  } else {
    throw DataError("pages path does not exist: " + path);
  }
  ReadCounts counts;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open pages file: " + file.string());
    PageReader reader(in, file.stem().string(), mode);
    Page p;
    while (reader.next(p)) {
      ++counts.pages;
      visit(std::move(p));
    }
    counts.empty += reader.empty_records();
    counts.malformed += reader.malformed_records();
  }
  return counts;
}

std::map<std::string, std::vector<Page>> read_pages_path(const std::string& path,
                                                         ReadMode mode) {
  std::map<std::string, std::vector<Page>> out;
  for_each_page(path, mode, [&](Page&& p) { out[p.language].push_back(std::move(p)); });
  return out;
}

std::vector<LinkGroup> load_links(std::istream& in) {
  std::vector<LinkGroup> groups;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    std::string group, lang, page, extra;
    if (!std::getline(fields, group, '\t') || !std::getline(fields, lang, '\t') ||
        !std::getline(fields, page, '\t') || std::getline(fields, extra, '\t') ||
        group.empty() || lang.empty() || page.empty()) {
      throw ParseError("links line " + std::to_string(lineno) +
                       ": expected group_id<TAB>lang<TAB>pageid");
    }
    auto [it, fresh] = index.emplace(group, groups.size());
    if (fresh) groups.push_back({group, {}});
    auto& members = groups[it->second].members;
    if (!members.emplace(lang, page).second) {
      throw DataError("links line " + std::to_string(lineno) +
                      ": duplicate member for group '" + group +
                      "' language '" + lang + "'");
    }
  }
  return groups;
}

std::vector<LinkGroup> load_links_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open links file: " + path);
  return load_links(in);
}

GoldLabels load_gold(std::istream& in) {
  GoldLabels gold;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    std::string lang, page, ids;
    if (!std::getline(fields, lang, '\t') || !std::getline(fields, page, '\t') ||
        !std::getline(fields, ids) || lang.empty() || page.empty()) {
      throw ParseError("gold line " + std::to_string(lineno) +
                       ": expected lang<TAB>pageid<TAB>ids");
    }
    auto& labels = gold[PageKey{lang, page}];
    std::istringstream list(ids);
    std::string id;
    while (std::getline(list, id, ',')) {
      if (id.empty()) continue;
      try {
        parse_label_id(id);
      } catch (const ParseError& e) {
        throw ParseError("gold line " + std::to_string(lineno) + ": " + e.what());
      }
      if (std::find(labels.begin(), labels.end(), id) == labels.end()) {
        labels.push_back(id);
      }
    }
  }
  return gold;
}

GoldLabels load_gold_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open gold label file: " + path);
  return load_gold(in);
}

std::uint64_t ratio_tenths(std::uint64_t pages, std::uint64_t linked) {
  if (pages == 0) return 0;
  // round(1000 * linked / pages), half up, in integers.
  return (2000 * linked + pages) / (2 * pages);
}

StatsRow make_stats_row(std::string language, std::uint64_t pages,
                        std::uint64_t linked) {
  return {std::move(language), pages, linked, ratio_tenths(pages, linked)};
}

std::vector<StatsRow> corpus_stats(const PageIndex& pages,
                                   const std::vector<LinkGroup>& links) {
  std::map<std::string, std::set<std::string>> linked;
  for (const auto& group : links) {
    for (const auto& [lang, page] : group.members) linked[lang].insert(page);
  }
  std::vector<StatsRow> rows;
  for (const auto& [lang, ids] : pages) {
    std::uint64_t n = 0;
    auto it = linked.find(lang);
    if (it != linked.end()) {
      for (const auto& id : ids) n += it->second.count(id);
    }
    rows.push_back(make_stats_row(lang, ids.size(), n));
  }
  return rows;
}

}  // namespace xlene
