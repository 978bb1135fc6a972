#include "xlene/adam.h"

#include <cmath>
#include <string>

#include "xlene/error.h"
#include "xlene/kernels.h"

namespace xlene {

AdamState make_adam_state(const ModelParams& params, const AdamConfig& config) {
  return {config, 0, ModelTensors<float>::like(params), ModelTensors<float>::like(params)};
}

void adam_step(ModelParams& params, const ModelGrads& grads, AdamState& state,
               int workers) {
  auto p = params.tensors();
  auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  for (std::size_t i = 0; i < kTensorCount; ++i) {
    if (g[i]->size() != p[i]->size() || m[i]->size() != p[i]->size() ||
        v[i]->size() != p[i]->size()) {
      throw ShapeError("adam: shape mismatch in " + std::string(kTensorNames[i]));
    }
    for (double x : g[i]->data) {
      if (!std::isfinite(x)) {
        throw NumericError("non-finite gradient in " + std::string(kTensorNames[i]));
      }
    }
  }
  ++state.step;
  for (std::size_t i = 0; i < kTensorCount; ++i) {
    if (p[i]->empty()) continue;
    kernels::adam_update_parallel(p[i]->data, g[i]->data, m[i]->data, v[i]->data,
                                  state.config, state.step, workers);
  }
}

}  // namespace xlene
