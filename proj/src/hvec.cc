#include "xlene/hvec.h"

#include <fstream>
#include <sstream>

#include "xlene/binio.h"
#include "xlene/error.h"

namespace xlene {

void PrecomputedVectors::add(const PageKey& key, std::span<const float> h) {
  if (h.size() != dim_) throw ShapeError("vector dimension does not match");
  if (!rows_.emplace(key, keys_.size()).second) {
    throw DataError("duplicate vector for " + key.lang + ":" + key.page_id);
  }
  keys_.push_back(key);
  data_.insert(data_.end(), h.begin(), h.end());
}

std::optional<std::span<const float>> PrecomputedVectors::find(const PageKey& key) const {
  auto it = rows_.find(key);
  if (it == rows_.end()) return std::nullopt;
  return std::span<const float>(data_).subspan(it->second * dim_, dim_);
}

PrecomputedVectors PrecomputedVectors::read(const std::string& bin_path,
                                            const std::string& tsv_path) {
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw DataError("cannot open vector file: " + bin_path);
  char magic[4];
  binio::get_bytes(bin, magic, 4, "HVEC magic");
  if (std::string(magic, 4) != "HVEC") throw DataError("bad magic in " + bin_path);
  std::uint32_t version = binio::get_u32(bin, "HVEC version");
  if (version != kHvecVersion) {
    throw DataError("unsupported HVEC version " + std::to_string(version));
  }
  std::uint32_t dim = binio::get_u32(bin, "HVEC dim");
  std::uint64_t count = binio::get_u64(bin, "HVEC count");
  if (dim == 0) throw DataError("HVEC dimension is zero");

  std::vector<float> data(static_cast<std::size_t>(count) * dim);
  binio::get_floats(bin, data, "HVEC data");

  std::ifstream tsv(tsv_path);
  if (!tsv) throw DataError("cannot open vector sidecar: " + tsv_path);
  PrecomputedVectors out(dim);
  std::vector<bool> seen(count, false);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(tsv, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string row, lang, page;
    std::getline(fields, row, '\t');
    std::getline(fields, lang, '\t');
    std::getline(fields, page, '\t');
    std::uint64_t r = 0;
    try {
      r = std::stoull(row);
    } catch (const std::exception&) {
      throw ParseError("vector sidecar line " + std::to_string(lineno) + ": bad row");
    }
    if (r >= count || lang.empty() || page.empty()) {
      throw ParseError("vector sidecar line " + std::to_string(lineno) +
                       ": row out of range or empty key");
    }
    if (seen[r]) {
      throw DataError("vector sidecar maps row " + row + " twice");
    }
    seen[r] = true;
    out.add(PageKey{lang, page},
            std::span<const float>(data).subspan(r * dim, dim));
  }
  return out;
}

void PrecomputedVectors::write(const std::string& bin_path,
                               const std::string& tsv_path) const {
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw DataError("cannot write vector file: " + bin_path);
  bin.write("HVEC", 4);
  binio::put_u32(bin, kHvecVersion);
  binio::put_u32(bin, static_cast<std::uint32_t>(dim_));
  binio::put_u64(bin, keys_.size());
  binio::put_floats(bin, data_);
  std::ofstream tsv(tsv_path);
  if (!tsv) throw DataError("cannot write vector sidecar: " + tsv_path);
  for (std::size_t r = 0; r < keys_.size(); ++r) {
    tsv << r << '\t' << keys_[r].lang << '\t' << keys_[r].page_id << '\n';
  }
}

}  // namespace xlene
