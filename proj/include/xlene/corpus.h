#pragma once

#include <compare>
#include <functional>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace xlene {

struct PageKey {
  std::string lang;
  std::string page_id;
  auto operator<=>(const PageKey&) const = default;
};

struct Page {
  std::string page_id;
  std::string language;
  std::string title;
  std::optional<std::string> text;
  std::optional<std::string> opening_text;

  PageKey key() const { return {language, page_id}; }
};

enum class ContentRule { kText, kOpeningPlusText };

// Text if present and non-empty, else the title. kOpeningPlusText prepends a
// non-empty opening_text to whatever the text rule selects.
std::string main_content(const Page& page, ContentRule rule = ContentRule::kText);

enum class ReadMode { kStrict, kSkip };

// Streams newline-delimited page objects (keys pageid, lang, title, text,
// opening_text). Holds one line at a time.
class PageReader {
 public:
  PageReader(std::istream& in, std::string default_language,
             ReadMode mode = ReadMode::kStrict);

  // Returns false at end of stream. Throws ParseError in strict mode.
  bool next(Page& page);

  std::size_t line_number() const { return line_no_; }
  // Records with neither text nor title.
  std::size_t empty_records() const { return empty_; }
  // Malformed lines dropped in skip mode.
  std::size_t malformed_records() const { return malformed_; }

 private:
  std::istream& in_;
  std::string default_language_;
  ReadMode mode_;
  std::string line_;
  std::size_t line_no_ = 0;
  std::size_t empty_ = 0;
  std::size_t malformed_ = 0;
};

std::vector<Page> read_pages(std::istream& in, const std::string& language,
                             ReadMode mode = ReadMode::kStrict);

struct ReadCounts {
  std::size_t pages = 0;
  std::size_t empty = 0;
  std::size_t malformed = 0;
};

// Streams every page of a .jsonl file or of each *.jsonl file in a
// directory (sorted by name). The file stem is the default language for
// records lacking `lang`.
ReadCounts for_each_page(const std::string& path, ReadMode mode,
                         const std::function<void(Page&&)>& visit);
std::map<std::string, std::vector<Page>> read_pages_path(
    const std::string& path, ReadMode mode = ReadMode::kStrict);

struct LinkGroup {
  std::string group_id;
  std::map<std::string, std::string> members;  // language -> page id
};

// TSV rows `group_id<TAB>lang<TAB>pageid`; groups in first-seen order.
std::vector<LinkGroup> load_links(std::istream& in);
std::vector<LinkGroup> load_links_file(const std::string& path);

using GoldLabels = std::map<PageKey, std::vector<std::string>>;

// TSV rows `lang<TAB>pageid<TAB>id,id,...`. Every id must parse.
GoldLabels load_gold(std::istream& in);
GoldLabels load_gold_file(const std::string& path);

struct StatsRow {
  std::string language;
  std::uint64_t pages = 0;
  std::uint64_t linked = 0;
  // 100 * linked / pages rounded half-up to one decimal, in tenths.
  std::uint64_t ratio_tenths = 0;

  double ratio() const { return static_cast<double>(ratio_tenths) / 10.0; }
};

std::uint64_t ratio_tenths(std::uint64_t pages, std::uint64_t linked);
StatsRow make_stats_row(std::string language, std::uint64_t pages,
                        std::uint64_t linked);

using PageIndex = std::map<std::string, std::set<std::string>>;

// One row per language (sorted by code). A page counts as linked when it is
// a member of some link group.
std::vector<StatsRow> corpus_stats(const PageIndex& pages,
                                   const std::vector<LinkGroup>& links);

}  // namespace xlene
