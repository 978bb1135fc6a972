#include "xlene/model.h"

#include <cmath>

#include "xlene/rng.h"

namespace xlene {

namespace {

void fill_uniform(Matrix<float>& m, float bound, Pcg32 rng) {
  for (float& x : m.data) x = (2.0f * rng.uniform_float() - 1.0f) * bound;
}

void fill_glorot(Matrix<float>& m, Pcg32 rng) {
  if (m.empty()) return;
  float bound = std::sqrt(6.0f / static_cast<float>(m.rows + m.cols));
  fill_uniform(m, bound, rng);
}

}  // namespace

Model init_model(const ModelSpec& spec, std::uint64_t seed) {
  Model model{spec, {}};
  if (spec.has_encoder()) {
    model.params.encoder = make_encoder(spec.vocab, spec.embed_dim, spec.hidden_dim);
  }
  model.params.head = make_head(spec.hidden_dim, spec.dims, spec.head.kind);

  Pcg32 root(seed);
  auto tensors = model.params.tensors();
  for (std::size_t i = 0; i < kTensorCount; ++i) {
    Pcg32 stream = root.split(i + 1);
    Matrix<float>& t = *tensors[i];
    if (i == 0) {
      fill_uniform(t, 0.5f, stream);
    } else if (t.cols > 1) {
      fill_glorot(t, stream);
    }
  }
  return model;
}

}  // namespace xlene
