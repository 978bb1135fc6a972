#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "xlene/encoder.h"
#include "xlene/hmcn.h"
#include "xlene/taxonomy.h"

namespace xlene {

inline constexpr std::size_t kTensorCount = 9;

// Canonical tensor order, shared by the optimizer and the checkpoint file.
inline constexpr std::array<std::string_view, kTensorCount> kTensorNames = {
    "encoder.embedding", "encoder.projection", "encoder.bias",
    "head.w2", "head.b2", "head.w3", "head.b3", "head.w4", "head.b4"};

template <typename T>
struct ModelTensors {
  EncoderTensors<T> encoder;
  HeadTensors<T> head;

  std::array<Matrix<T>*, kTensorCount> tensors() {
    return {&encoder.embedding, &encoder.projection, &encoder.bias,
            &head.w2, &head.b2, &head.w3, &head.b3, &head.w4, &head.b4};
  }
  std::array<const Matrix<T>*, kTensorCount> tensors() const {
    return {&encoder.embedding, &encoder.projection, &encoder.bias,
            &head.w2, &head.b2, &head.w3, &head.b3, &head.w4, &head.b4};
  }

  template <typename U>
  static ModelTensors like(const ModelTensors<U>& other) {
    ModelTensors out;
    auto dst = out.tensors();
    auto src = other.tensors();
    for (std::size_t i = 0; i < kTensorCount; ++i) {
      *dst[i] = Matrix<T>(src[i]->rows, src[i]->cols);
    }
    return out;
  }

  bool operator==(const ModelTensors&) const = default;
};

using ModelParams = ModelTensors<float>;
using ModelGrads = ModelTensors<double>;

// vocab == 0 means the model has no encoder and consumes precomputed
// document vectors of dimension hidden_dim.
struct ModelSpec {
  std::uint32_t vocab = kDefaultVocab;
  std::uint32_t embed_dim = kDefaultEmbedDim;
  std::uint32_t hidden_dim = kDefaultHiddenDim;
  LevelDims dims;
  HeadOptions head;

  bool has_encoder() const { return vocab != 0; }
  bool operator==(const ModelSpec&) const = default;
};

struct Model {
  ModelSpec spec;
  ModelParams params;
};

// Uniform(-0.5, 0.5) embeddings, Glorot-uniform weights, zero biases. Each
// tensor draws from its own stream split off `seed`.
Model init_model(const ModelSpec& spec, std::uint64_t seed);

}  // namespace xlene
