#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "xlene/taxonomy.h"
#include "xlene/tensor.h"

namespace xlene {

enum class HeadKind : std::uint32_t {
  kHierarchical = 0,  // E2 -> E3 -> fine, each level sees earlier logits
  kFlat = 1,          // single linear map H -> fine
};

enum class Feedback : std::uint32_t {
  kLogits = 0,   // concatenate raw logits into deeper levels
  kSigmoid = 1,  // concatenate sigmoid(logits)
};

struct HeadOptions {
  HeadKind kind = HeadKind::kHierarchical;
  Feedback feedback = Feedback::kLogits;
  bool operator==(const HeadOptions&) const = default;
};

// Weights are (out x in); input layout of w3 is [h, f2] and of w4 is
// [h, f2, f3]. Flat heads leave w2/b2/w3/b3 empty and give w4 (fine x d_h).
template <typename T>
struct HeadTensors {
  Matrix<T> w2, b2, w3, b3, w4, b4;
  bool operator==(const HeadTensors&) const = default;
};

using HeadParams = HeadTensors<float>;
using HeadGrads = HeadTensors<double>;

HeadParams make_head(std::size_t hidden, const LevelDims& dims, HeadKind kind);
HeadGrads zero_grads_like(const HeadParams& params);

struct LevelLogits {
  std::vector<double> y2, y3, y4;

  std::vector<double>& level(int i);
  const std::vector<double>& level(int i) const;
};

// Values fed forward into deeper levels.
struct HeadTrace {
  std::vector<double> f2, f3;
};

LevelLogits forward(std::span<const double> h, const HeadParams& params,
                    const HeadOptions& options, HeadTrace* trace = nullptr);

struct LossWeights {
  std::vector<double> w2, w3, w4;

  std::vector<double>& level(int i);
  const std::vector<double>& level(int i) const;
};

// w_j = min(mean(c) / c_j, 1), and 1 where c_j = 0.
std::vector<double> level_weights(std::span<const std::uint64_t> counts);
LossWeights compute_weights(std::span<const std::uint64_t> c2,
                            std::span<const std::uint64_t> c3,
                            std::span<const std::uint64_t> c4);
LossWeights unit_weights(const LevelDims& dims);

// Per-level label frequencies over (ancestor-closed) targets.
struct LevelCounts {
  std::vector<std::uint64_t> c2, c3, c4;
};
LevelCounts count_labels(std::span<const LevelTargets> targets, const LevelDims& dims);

inline double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// -[y log s(z) + (1-y) log(1-s(z))] in a form that cannot overflow.
double bce_with_logits(double z, double y);

// -(1/M) sum_j w_j bce(z_j, y_j). Zero for an empty level.
double level_loss(std::span<const double> logits, std::span<const float> targets,
                  std::span<const double> weights);

// Sum of the level losses for every level the logits populate.
double loss(const LevelLogits& logits, const LevelTargets& targets,
            const LossWeights& weights);

// Backward pass for one document in factored form: the weight gradient of
// level i is the outer product g_i x input_i.
struct HeadSampleGrad {
  std::vector<double> g2, g3, g4;  // dJ / d logits, cross-level paths included
  HeadTrace trace;
  std::vector<double> dh;
  double loss = 0.0;
};

HeadSampleGrad head_sample_grad(std::span<const double> h, const HeadParams& params,
                                const HeadOptions& options,
                                const LevelTargets& targets,
                                const LossWeights& weights);

struct HeadBackward {
  HeadGrads grads;
  std::vector<double> dh;
  double loss = 0.0;
};

HeadBackward backward(std::span<const double> h, const HeadParams& params,
                      const HeadOptions& options, const LevelTargets& targets,
                      const LossWeights& weights);

}  // namespace xlene
