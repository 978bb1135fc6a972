#include "xlene/gradcheck.h"

#include <cmath>

#include "xlene/kernels.h"
#include "xlene/model.h"
#include "xlene/rng.h"

namespace xlene {

namespace {

double batch_loss(const Model& model, std::span<const kernels::Example* const> batch,
                  const LossWeights& weights) {
  double total = 0.0;
  for (const auto* ex : batch) {
    auto h = kernels::document_vector(model, *ex);
    total += loss(forward(h, model.params.head, model.spec.head), ex->targets, weights);
  }
  return total / static_cast<double>(batch.size());
}

}  // namespace

GradCheckResult gradient_check(std::uint64_t seed, const GradCheckOptions& options) {
  Pcg32 root(seed);
  ModelSpec spec;
  spec.vocab = options.vocab;
  spec.embed_dim = options.embed_dim;
  spec.hidden_dim = options.hidden_dim;
  spec.dims = options.dims;
  spec.head = options.head;
  Model model = init_model(spec, root.next_u64());

  // Non-zero biases so every path is exercised.
  Pcg32 bias_rng = root.split(1);
  for (auto* t : {&model.params.encoder.bias, &model.params.head.b2, &model.params.head.b3,
                  &model.params.head.b4}) {
    for (float& b : t->data) b = bias_rng.uniform_float() - 0.5f;
  }

  Pcg32 data_rng = root.split(2);
  std::vector<kernels::Example> examples(options.docs);
  for (auto& ex : examples) {
    ex.tokens.framed = true;
    ex.tokens.ids.push_back(kBeginToken);
    std::size_t n = data_rng.bounded(static_cast<std::uint32_t>(options.max_tokens + 1));
    for (std::size_t i = 0; i < n; ++i) {
      ex.tokens.ids.push_back(static_cast<std::int32_t>(2 + data_rng.bounded(options.vocab - 2)));
    }
    ex.tokens.ids.push_back(kEndToken);
    for (int level = 2; level <= 4; ++level) {
      auto& y = ex.targets.level(level);
      y.resize(options.dims[level]);
      for (auto& v : y) v = data_rng.bounded(2) ? 1.0f : 0.0f;
    }
  }
  LossWeights weights;
  for (int level = 2; level <= 4; ++level) {
    auto& w = weights.level(level);
    w.resize(options.dims[level]);
    for (auto& v : w) v = 0.05 + 0.95 * data_rng.uniform_double();
  }

  std::vector<const kernels::Example*> batch;
  for (const auto& ex : examples) batch.push_back(&ex);
  auto analytic = kernels::batch_gradients_serial(model, batch, weights);

  GradCheckResult result;
  auto params = model.params.tensors();
  auto grads = analytic.grads.tensors();
  for (std::size_t t = 0; t < kTensorCount; ++t) {
    for (std::size_t i = 0; i < params[t]->size(); ++i) {
      float& p = params[t]->data[i];
      const float saved = p;
      const float plus = static_cast<float>(saved + options.delta);
      const float minus = static_cast<float>(saved - options.delta);
      p = plus;
      double up = batch_loss(model, batch, weights);
      p = minus;
      double down = batch_loss(model, batch, weights);
      p = saved;
      // Divide by the step actually taken after rounding to float.
      const double numeric = (up - down) / (static_cast<double>(plus) - minus);
      const double a = grads[t]->data[i];
      const double abs_err = std::abs(a - numeric);
      ++result.checked;
      result.max_abs_error = std::max(result.max_abs_error, abs_err);
      const double scale = std::max(std::abs(a), std::abs(numeric));
      const double rel = scale > 0.0 ? abs_err / scale : 0.0;
      if (scale >= options.report_floor && rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_tensor = std::string(kTensorNames[t]);
      }
      if (abs_err > options.abs_tol && rel >= options.rel_tol) ++result.failures;
    }
  }
  return result;
}

}  // namespace xlene
