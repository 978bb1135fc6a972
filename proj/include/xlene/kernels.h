#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xlene/adam.h"
#include "xlene/encoder.h"
#include "xlene/hmcn.h"
#include "xlene/model.h"

// Data-parallel kernels. Each *_parallel function has a *_serial reference
// with identical floating-point association order, so results agree
// bit-for-bit for any worker count.
namespace xlene::kernels {

// One training or scoring document: either tokens for the built-in encoder
// or a precomputed document vector.
struct Example {
  TokenSequence tokens;
  std::vector<float> fixed_h;
  LevelTargets targets;
};

struct BatchGradients {
  ModelGrads grads;  // mean over the batch
  double loss = 0.0;  // mean over the batch
};

BatchGradients batch_gradients_serial(const Model& model,
                                      std::span<const Example* const> batch,
                                      const LossWeights& weights);
BatchGradients batch_gradients_parallel(const Model& model,
                                        std::span<const Example* const> batch,
                                        const LossWeights& weights, int workers);

// Document vector for one example.
std::vector<double> document_vector(const Model& model, const Example& ex,
                                    EncoderTrace* trace = nullptr);

// Fine-level logits per example.
std::vector<std::vector<double>> fine_logits_serial(const Model& model,
                                                    std::span<const Example* const> docs);
std::vector<std::vector<double>> fine_logits_parallel(const Model& model,
                                                      std::span<const Example* const> docs,
                                                      int workers);

void adam_update_serial(std::span<float> params, std::span<const double> grads,
                        std::span<float> m, std::span<float> v,
                        const AdamConfig& config, std::uint64_t step);
void adam_update_parallel(std::span<float> params, std::span<const double> grads,
                          std::span<float> m, std::span<float> v,
                          const AdamConfig& config, std::uint64_t step, int workers);

}  // namespace xlene::kernels
