#include "xlene/kernels.h"

#include <cmath>
#include <omp.h>

#include "xlene/error.h"

namespace xlene::kernels {

namespace {

struct SampleGrad {
  std::vector<double> h;
  EncoderTrace enc;
  EncoderLocalGrad local;
  HeadSampleGrad head;
  std::span<const std::int32_t> interior;
};

SampleGrad sample_grad(const Model& model, const Example& ex, const LossWeights& weights) {
  SampleGrad s;
  s.h = document_vector(model, ex, &s.enc);
  s.head = head_sample_grad(s.h, model.params.head, model.spec.head, ex.targets, weights);
  if (model.spec.has_encoder()) {
    s.local = encoder_local_grad(model.params.encoder, s.enc, s.head.dh);
    s.interior = ex.tokens.interior();
  }
  return s;
}

// The rank-1 factors (g, x) of each dense gradient tensor for one sample.
struct Factor {
  std::span<const double> g;
  std::array<std::span<const double>, 3> x;
};

enum Slot { kProjection, kW2, kW3, kW4, kSlots };

Factor factor(const SampleGrad& s, Slot slot, const HeadOptions& options) {
  switch (slot) {
    case kProjection:
      return {s.local.dpre, {s.enc.pooled, {}, {}}};
    case kW2:
      return {s.head.g2, {s.h, {}, {}}};
    case kW3:
      return {s.head.g3, {s.h, s.head.trace.f2, {}}};
    case kW4:
      if (options.kind == HeadKind::kFlat) return {s.head.g4, {s.h, {}, {}}};
      return {s.head.g4, {s.h, s.head.trace.f2, s.head.trace.f3}};
    default:
      break;
  }
  return {};
}

std::pair<Matrix<double>*, Matrix<double>*> slot_tensors(ModelGrads& g, Slot slot) {
  switch (slot) {
    case kProjection: return {&g.encoder.projection, &g.encoder.bias};
    case kW2: return {&g.head.w2, &g.head.b2};
    case kW3: return {&g.head.w3, &g.head.b3};
    case kW4: return {&g.head.w4, &g.head.b4};
    default: break;
  }
  return {nullptr, nullptr};
}

// Row r of (dW, db) summed over samples in index order.
void reduce_row(Matrix<double>& dw, Matrix<double>& db, std::size_t r,
                const std::vector<SampleGrad>& samples, Slot slot,
                const HeadOptions& options) {
  auto row = dw.row(r);
  for (const auto& s : samples) {
    Factor f = factor(s, slot, options);
    const double g = f.g[r];
    db.data[r] += g;
    std::size_t c = 0;
    for (auto part : f.x) {
      for (double x : part) row[c++] += g * x;
    }
  }
}

void scale_all(ModelGrads& grads, double factor, int workers) {
  for (Matrix<double>* t : grads.tensors()) {
    auto n = static_cast<std::ptrdiff_t>(t->size());
    double* d = t->data.data();
#pragma omp parallel for num_threads(workers) schedule(static) if (workers > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) d[i] *= factor;
  }
}

void check_batch(std::span<const Example* const> batch) {
  if (batch.empty()) throw ShapeError("empty batch");
}

}  // namespace

std::vector<double> document_vector(const Model& model, const Example& ex,
                                    EncoderTrace* trace) {
  if (model.spec.has_encoder()) return encode(ex.tokens, model.params.encoder, trace);
  if (ex.fixed_h.size() != model.spec.hidden_dim) {
    throw ShapeError("precomputed document vector has wrong dimension");
  }
  return {ex.fixed_h.begin(), ex.fixed_h.end()};
}

BatchGradients batch_gradients_serial(const Model& model,
                                      std::span<const Example* const> batch,
                                      const LossWeights& weights) {
  check_batch(batch);
  BatchGradients out{ModelGrads::like(model.params), 0.0};
  std::vector<SampleGrad> samples;
  samples.reserve(batch.size());
  for (const Example* ex : batch) samples.push_back(sample_grad(model, *ex, weights));

  for (const auto& s : samples) {
    out.loss += s.head.loss;
    for (int slot = 0; slot < kSlots; ++slot) {
      auto [dw, db] = slot_tensors(out.grads, static_cast<Slot>(slot));
      if (dw->empty() && db->empty()) continue;
      Factor f = factor(s, static_cast<Slot>(slot), model.spec.head);
      for (std::size_t r = 0; r < dw->rows; ++r) {
        db->data[r] += f.g[r];
        auto row = dw->row(r);
        std::size_t c = 0;
        for (auto part : f.x) {
          for (double x : part) row[c++] += f.g[r] * x;
        }
      }
    }
    if (!s.interior.empty()) {
      const double inv = 1.0 / static_cast<double>(s.interior.size());
      for (std::int32_t id : s.interior) {
        auto row = out.grads.encoder.embedding.row(id);
        for (std::size_t k = 0; k < row.size(); ++k) row[k] += s.local.dpooled[k] * inv;
      }
    }
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv_b;
  scale_all(out.grads, inv_b, 1);
  return out;
}

BatchGradients batch_gradients_parallel(const Model& model,
                                        std::span<const Example* const> batch,
                                        const LossWeights& weights, int workers) {
  check_batch(batch);
  if (workers < 1) workers = 1;
  BatchGradients out{ModelGrads::like(model.params), 0.0};
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
  std::vector<SampleGrad> samples(batch.size());

  // Exceptions may not cross the parallel region boundary.
  std::exception_ptr error;
#pragma omp parallel for num_threads(workers) schedule(static)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    try {
      samples[s] = sample_grad(model, *batch[s], weights);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  for (const auto& s : samples) out.loss += s.head.loss;

  for (int slot = 0; slot < kSlots; ++slot) {
    auto [dw, db] = slot_tensors(out.grads, static_cast<Slot>(slot));
    const auto rows = static_cast<std::ptrdiff_t>(dw->rows);
#pragma omp parallel for num_threads(workers) schedule(static)
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
      reduce_row(*dw, *db, static_cast<std::size_t>(r), samples,
                 static_cast<Slot>(slot), model.spec.head);
    }
  }

  // Each thread owns a contiguous block of vocabulary rows and visits the
  // tokens in sample order, so every row accumulates as in the serial loop.
  auto& emb = out.grads.encoder.embedding;
  if (!emb.empty()) {
#pragma omp parallel num_threads(workers)
    {
      const auto threads = static_cast<std::size_t>(omp_get_num_threads());
      const auto t = static_cast<std::size_t>(omp_get_thread_num());
      const std::size_t lo = emb.rows * t / threads;
      const std::size_t hi = emb.rows * (t + 1) / threads;
      for (const auto& s : samples) {
        if (s.interior.empty()) continue;
        const double inv = 1.0 / static_cast<double>(s.interior.size());
        for (std::int32_t id : s.interior) {
          const auto row_id = static_cast<std::size_t>(id);
          if (row_id < lo || row_id >= hi) continue;
          auto row = emb.row(row_id);
          for (std::size_t k = 0; k < row.size(); ++k) row[k] += s.local.dpooled[k] * inv;
        }
      }
    }
  }

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv_b;
  scale_all(out.grads, inv_b, workers);
  return out;
}

std::vector<std::vector<double>> fine_logits_serial(const Model& model,
                                                    std::span<const Example* const> docs) {
  std::vector<std::vector<double>> out;
  out.reserve(docs.size());
  for (const Example* ex : docs) {
    out.push_back(forward(document_vector(model, *ex), model.params.head, model.spec.head).y4);
  }
  return out;
}

std::vector<std::vector<double>> fine_logits_parallel(const Model& model,
                                                      std::span<const Example* const> docs,
                                                      int workers) {
  if (workers < 1) workers = 1;
  std::vector<std::vector<double>> out(docs.size());
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
  std::exception_ptr error;
#pragma omp parallel for num_threads(workers) schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = forward(document_vector(model, *docs[i]), model.params.head,
                       model.spec.head).y4;
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

namespace {

struct AdamCoefficients {
  double bc1, bc2;
};

AdamCoefficients coefficients(const AdamConfig& config, std::uint64_t step) {
  auto t = static_cast<double>(step);
  return {1.0 - std::pow(config.beta1, t), 1.0 - std::pow(config.beta2, t)};
}

inline void adam_element(float& p, double g, float& m, float& v, const AdamConfig& c,
                         const AdamCoefficients& k) {
  const double mi = c.beta1 * m + (1.0 - c.beta1) * g;
  const double vi = c.beta2 * v + (1.0 - c.beta2) * g * g;
  m = static_cast<float>(mi);
  v = static_cast<float>(vi);
  p = static_cast<float>(p - c.learning_rate * (mi / k.bc1) / (std::sqrt(vi / k.bc2) + c.eps));
}

void check_adam_shapes(std::span<float> p, std::span<const double> g, std::span<float> m,
                       std::span<float> v, std::uint64_t step) {
  if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
    throw ShapeError("adam: parameter, gradient and moment sizes differ");
  }
  if (step == 0) throw ShapeError("adam: step counter starts at 1");
}

}  // namespace

void adam_update_serial(std::span<float> params, std::span<const double> grads,
                        std::span<float> m, std::span<float> v,
                        const AdamConfig& config, std::uint64_t step) {
  check_adam_shapes(params, grads, m, v, step);
  const auto k = coefficients(config, step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_element(params[i], grads[i], m[i], v[i], config, k);
  }
}

void adam_update_parallel(std::span<float> params, std::span<const double> grads,
                          std::span<float> m, std::span<float> v,
                          const AdamConfig& config, std::uint64_t step, int workers) {
  check_adam_shapes(params, grads, m, v, step);
  if (workers < 1) workers = 1;
  const auto k = coefficients(config, step);
  const auto n = static_cast<std::ptrdiff_t>(params.size());
#pragma omp parallel for num_threads(workers) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    adam_element(params[i], grads[i], m[i], v[i], config, k);
  }
}

}  // namespace xlene::kernels
