#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "xlene/tensor.h"

namespace xlene {

inline constexpr std::int32_t kBeginToken = 0;
inline constexpr std::int32_t kEndToken = 1;
inline constexpr std::uint32_t kDefaultVocab = 1u << 18;
inline constexpr std::size_t kDefaultEmbedDim = 64;
inline constexpr std::size_t kDefaultHiddenDim = 128;

struct TokenSequence {
  std::vector<std::int32_t> ids;
  bool framed = false;

  // Ids between BEGIN and END.
  std::span<const std::int32_t> interior() const;
};

// Lowercases ASCII, splits on ASCII whitespace and punctuation, and emits
// each word followed by its code-point 3-grams (only for words longer than
// three code points).
std::vector<std::string> subword_units(std::string_view text);

// FNV-1a(unit) mod (vocab - 2) + 2; ids 0 and 1 are reserved.
std::int32_t hash_unit(std::string_view unit, std::uint32_t vocab);

// [BEGIN, first min(m, max_len - 2) units, END].
TokenSequence tokenize(std::string_view text, std::size_t max_len,
                       std::uint32_t vocab = kDefaultVocab);

template <typename T>
struct EncoderTensors {
  Matrix<T> embedding;   // vocab x d_e
  Matrix<T> projection;  // d_h x d_e
  Matrix<T> bias;        // d_h x 1

  std::size_t vocab() const { return embedding.rows; }
  std::size_t embed_dim() const { return embedding.cols; }
  std::size_t hidden_dim() const { return projection.rows; }
  bool empty() const { return embedding.empty() && projection.empty(); }

  bool operator==(const EncoderTensors&) const = default;
};

using EncoderParams = EncoderTensors<float>;
using EncoderGrads = EncoderTensors<double>;

EncoderParams make_encoder(std::uint32_t vocab, std::size_t embed_dim,
                           std::size_t hidden_dim);
EncoderGrads zero_grads_like(const EncoderParams& params);

// Intermediate values of one encode call, reused by the backward pass.
struct EncoderTrace {
  std::vector<double> pooled;  // mean interior embedding, d_e
  std::vector<double> h;       // tanh output, d_h
};

// H = tanh(P * mean(E[interior]) + b); mean of nothing is zero.
std::vector<double> encode(const TokenSequence& tokens, const EncoderParams& params,
                           EncoderTrace* trace = nullptr);

// Gradient of the pooled-embedding path for upstream dL/dH:
// returns dL/d(pre-activation) and dL/d(pooled).
struct EncoderLocalGrad {
  std::vector<double> dpre;     // d_h
  std::vector<double> dpooled;  // d_e
};
EncoderLocalGrad encoder_local_grad(const EncoderParams& params,
                                    const EncoderTrace& trace,
                                    std::span<const double> dh);

// Dense parameter gradients of encode for upstream dL/dH.
EncoderGrads encode_gradients(const TokenSequence& tokens,
                              const EncoderParams& params,
                              std::span<const double> dh);

}  // namespace xlene
