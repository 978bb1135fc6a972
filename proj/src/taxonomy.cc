#include "xlene/taxonomy.h"

#include <charconv>
#include <fstream>

#include "xlene/error.h"
#include "xlene/hash.h"

namespace xlene {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

EneLabel parse_label_id(std::string_view id) {
  auto fail = [&](const char* why) {
    throw ParseError("malformed ENE id '" + std::string(id) + "': " + why);
  };
  if (id.empty()) fail("empty");
  EneLabel label;
  std::size_t start = 0;
  for (;;) {
    std::size_t dot = id.find('.', start);
    std::string_view part = id.substr(start, dot - start);
    if (part.empty()) fail("empty component");
    if (part.size() > 1 && part.front() == '0') fail("leading zero");
    int value = 0;
    auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || end != part.data() + part.size() || value < 0) {
      fail("non-numeric component");
    }
    label.path.push_back(value);
    if (label.path.size() > kMaxLevel) fail("more than 4 components");
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  label.level = static_cast<int>(label.path.size());
  label.id = std::string(id);
  return label;
}

std::string format_label_id(std::span<const int> path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(path[i]);
  }
  return out;
}

std::size_t LevelDims::operator[](int level) const {
  switch (level) {
    case 2: return coarse;
    case 3: return mid;
    case 4: return fine;
  }
  throw ShapeError("level must be 2, 3 or 4");
}

std::vector<float>& LevelTargets::level(int i) {
  switch (i) {
    case 2: return y2;
    case 3: return y3;
    case 4: return y4;
  }
  throw ShapeError("level must be 2, 3 or 4");
}

const std::vector<float>& LevelTargets::level(int i) const {
  return const_cast<LevelTargets*>(this)->level(i);
}

Taxonomy Taxonomy::load(std::istream& in) {
  Taxonomy tax;
  std::vector<EneLabel> all;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim_cr(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = split_tabs(view);
    EneLabel label;
    try {
      label = parse_label_id(fields[0]);
    } catch (const ParseError& e) {
      throw ParseError("taxonomy line " + std::to_string(lineno) + ": " + e.what());
    }
    label.assignable = label.level == kMaxLevel;
    std::size_t name_field = 1;
    if (fields.size() >= 2 && (fields[1] == "0" || fields[1] == "1")) {
      label.assignable = fields[1] == "1";
      name_field = 2;
    }
    if (fields.size() > name_field) label.name = std::string(fields[name_field]);
    if (tax.index_.count(label.id)) {
      throw DataError("taxonomy line " + std::to_string(lineno) +
                      ": duplicate id '" + label.id + "'");
    }
    auto& level = tax.by_level_[label.level - 1];
    tax.index_.emplace(label.id, Slot{label.level, level.size()});
    level.push_back(label);
    all.push_back(std::move(label));
  }
  if (all.empty()) throw DataError("taxonomy is empty");

  std::uint64_t h = kFnvOffset;
  for (const auto& label : all) {
    if (label.level > 1) {
      std::span<const int> prefix(label.path.data(), label.path.size() - 1);
      if (!tax.index_.count(format_label_id(prefix))) {
        throw DataError("orphan label '" + label.id + "': parent '" +
                        format_label_id(prefix) + "' is not defined");
      }
    }
    if (label.assignable) {
      tax.fine_index_.emplace(label.id, tax.fine_.size());
      tax.fine_.push_back(label);
    }
    h = fnv1a64(label.id, h);
    h = fnv1a64(label.assignable ? "\t1\n" : "\t0\n", h);
  }
  tax.hash_ = h;
  return tax;
}

Taxonomy Taxonomy::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open taxonomy file: " + path);
  return load(in);
}

std::span<const EneLabel> Taxonomy::labels(int level) const {
  if (level < 1 || level > kMaxLevel) throw ShapeError("level out of range");
  return by_level_[level - 1];
}

std::array<std::size_t, kMaxLevel> Taxonomy::level_sizes() const {
  return {by_level_[0].size(), by_level_[1].size(), by_level_[2].size(),
          by_level_[3].size()};
}

LevelDims Taxonomy::dims() const {
  return {by_level_[1].size(), by_level_[2].size(), fine_.size()};
}

bool Taxonomy::contains(std::string_view id) const {
  return index_.count(std::string(id)) != 0;
}

const Taxonomy::Slot& Taxonomy::slot(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) {
    throw DataError("unknown ENE label '" + std::string(id) + "'");
  }
  return it->second;
}

const EneLabel& Taxonomy::get(std::string_view id) const {
  const Slot& s = slot(id);
  return by_level_[s.level - 1][s.position];
}

std::size_t Taxonomy::position(std::string_view id) const {
  return slot(id).position;
}

std::optional<std::string> Taxonomy::parent(std::string_view id) const {
  const EneLabel& label = get(id);
  if (label.level == 1) return std::nullopt;
  return format_label_id(std::span<const int>(label.path.data(), label.path.size() - 1));
}

std::vector<EneLabel> Taxonomy::ancestors(std::string_view id) const {
  const EneLabel& label = get(id);
  std::vector<EneLabel> out;
  for (std::size_t n = 1; n < label.path.size(); ++n) {
    out.push_back(get(format_label_id(std::span<const int>(label.path.data(), n))));
  }
  return out;
}

std::optional<std::size_t> Taxonomy::fine_position(std::string_view id) const {
  auto it = fine_index_.find(std::string(id));
  if (it == fine_index_.end()) return std::nullopt;
  return it->second;
}

LevelTargets Taxonomy::zero_targets() const {
  LevelDims d = dims();
  return {std::vector<float>(d.coarse), std::vector<float>(d.mid),
          std::vector<float>(d.fine)};
}

LevelTargets Taxonomy::encode_targets(std::span<const std::string> ids) const {
  LevelTargets t = zero_targets();
  for (const auto& id : ids) {
    const EneLabel& label = get(id);
    for (std::size_t n = 2; n <= label.path.size() && n <= 3; ++n) {
      const Slot& s =
          slot(format_label_id(std::span<const int>(label.path.data(), n)));
      t.level(s.level)[s.position] = 1.0f;
    }
    if (auto fine = fine_position(id)) t.y4[*fine] = 1.0f;
  }
  return t;
}

}  // namespace xlene
