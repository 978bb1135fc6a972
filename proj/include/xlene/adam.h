#pragma once

#include <cstdint>

#include "xlene/model.h"

namespace xlene {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool operator==(const AdamConfig&) const = default;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  ModelTensors<float> m;
  ModelTensors<float> v;
};

AdamState make_adam_state(const ModelParams& params, const AdamConfig& config);

// One bias-corrected Adam update. Throws NumericError naming the first
// tensor with a non-finite gradient; nothing is modified in that case.
void adam_step(ModelParams& params, const ModelGrads& grads, AdamState& state,
               int workers = 1);

}  // namespace xlene
