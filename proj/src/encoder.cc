#include "xlene/encoder.h"

#include <cctype>
#include <cmath>
#include <string>

#include "xlene/error.h"
#include "xlene/hash.h"

namespace xlene {

std::span<const std::int32_t> TokenSequence::interior() const {
  if (!framed) return ids;
  if (ids.size() < 2) return {};
  return std::span<const std::int32_t>(ids).subspan(1, ids.size() - 2);
}

namespace {

bool is_boundary(unsigned char c) {
  if (c >= 0x80) return false;
  return std::isspace(c) || std::ispunct(c);
}

void emit_word(std::string_view word, std::vector<std::string>& out) {
  out.emplace_back(word);
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if ((static_cast<unsigned char>(word[i]) & 0xC0) != 0x80) starts.push_back(i);
  }
  if (starts.size() <= 3) return;
  starts.push_back(word.size());
  for (std::size_t k = 0; k + 3 < starts.size(); ++k) {
    out.emplace_back(word.substr(starts[k], starts[k + 3] - starts[k]));
  }
}

}  // namespace

std::vector<std::string> subword_units(std::string_view text) {
  std::vector<std::string> units;
  std::string word;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_boundary(c)) {
      if (!word.empty()) emit_word(word, units);
      word.clear();
      continue;
    }
    word += (c < 0x80) ? static_cast<char>(std::tolower(c)) : ch;
  }
  if (!word.empty()) emit_word(word, units);
  return units;
}

std::int32_t hash_unit(std::string_view unit, std::uint32_t vocab) {
  return static_cast<std::int32_t>(fnv1a64(unit) % (vocab - 2) + 2);
}

TokenSequence tokenize(std::string_view text, std::size_t max_len,
                       std::uint32_t vocab) {
  if (max_len < 3) throw ShapeError("max sequence length must be >= 3");
  if (vocab < 3) throw ShapeError("hash vocabulary must be >= 3");
  auto units = subword_units(text);
  std::size_t t = std::min(units.size(), max_len - 2);
  TokenSequence seq;
  seq.framed = true;
  seq.ids.reserve(t + 2);
  seq.ids.push_back(kBeginToken);
  for (std::size_t i = 0; i < t; ++i) seq.ids.push_back(hash_unit(units[i], vocab));
  seq.ids.push_back(kEndToken);
  return seq;
}

EncoderParams make_encoder(std::uint32_t vocab, std::size_t embed_dim,
                           std::size_t hidden_dim) {
  if (vocab < 3 || embed_dim == 0 || hidden_dim == 0) {
    throw ShapeError("encoder dimensions must be positive (vocab >= 3)");
  }
  EncoderParams p;
  p.embedding = Matrix<float>(vocab, embed_dim);
  p.projection = Matrix<float>(hidden_dim, embed_dim);
  p.bias = Matrix<float>(hidden_dim, 1);
  return p;
}

EncoderGrads zero_grads_like(const EncoderParams& params) {
  EncoderGrads g;
  g.embedding = Matrix<double>::like(params.embedding);
  g.projection = Matrix<double>::like(params.projection);
  g.bias = Matrix<double>::like(params.bias);
  return g;
}

std::vector<double> encode(const TokenSequence& tokens, const EncoderParams& params,
                           EncoderTrace* trace) {
  if (!tokens.framed) throw ShapeError("encode expects a framed token sequence");
  const std::size_t de = params.embed_dim(), dh = params.hidden_dim();
  auto interior = tokens.interior();
  std::vector<double> pooled(de, 0.0);
  for (std::int32_t id : interior) {
    if (id < 0 || static_cast<std::size_t>(id) >= params.vocab()) {
      throw ShapeError("token id " + std::to_string(id) +
                       " outside the encoder vocabulary");
    }
    auto row = params.embedding.row(id);
    for (std::size_t k = 0; k < de; ++k) pooled[k] += row[k];
  }
  if (!interior.empty()) {
    const double inv = 1.0 / static_cast<double>(interior.size());
    for (auto& v : pooled) v *= inv;
  }
  std::vector<double> h(dh);
  for (std::size_t r = 0; r < dh; ++r) {
    double acc = params.bias.data[r];
    auto w = params.projection.row(r);
    for (std::size_t k = 0; k < de; ++k) acc += w[k] * pooled[k];
    h[r] = std::tanh(acc);
  }
  if (trace) {
    trace->pooled = pooled;
    trace->h = h;
  }
  return h;
}

EncoderLocalGrad encoder_local_grad(const EncoderParams& params,
                                    const EncoderTrace& trace,
                                    std::span<const double> dh) {
  const std::size_t de = params.embed_dim(), hd = params.hidden_dim();
  if (dh.size() != hd) throw ShapeError("upstream gradient has wrong dimension");
  EncoderLocalGrad g{std::vector<double>(hd), std::vector<double>(de, 0.0)};
  for (std::size_t r = 0; r < hd; ++r) {
    g.dpre[r] = dh[r] * (1.0 - trace.h[r] * trace.h[r]);
    auto w = params.projection.row(r);
    for (std::size_t k = 0; k < de; ++k) g.dpooled[k] += w[k] * g.dpre[r];
  }
  return g;
}

EncoderGrads encode_gradients(const TokenSequence& tokens,
                              const EncoderParams& params,
                              std::span<const double> dh) {
  EncoderTrace trace;
  encode(tokens, params, &trace);
  auto local = encoder_local_grad(params, trace, dh);
  EncoderGrads g = zero_grads_like(params);
  const std::size_t de = params.embed_dim();
  for (std::size_t r = 0; r < params.hidden_dim(); ++r) {
    g.bias.data[r] = local.dpre[r];
    auto row = g.projection.row(r);
    for (std::size_t k = 0; k < de; ++k) row[k] = local.dpre[r] * trace.pooled[k];
  }
  auto interior = tokens.interior();
  if (!interior.empty()) {
    const double inv = 1.0 / static_cast<double>(interior.size());
    for (std::int32_t id : interior) {
      auto row = g.embedding.row(id);
      for (std::size_t k = 0; k < de; ++k) row[k] += local.dpooled[k] * inv;
    }
  }
  return g;
}

}  // namespace xlene
