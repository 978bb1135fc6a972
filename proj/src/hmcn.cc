#include "xlene/hmcn.h"

#include <cmath>
#include <numeric>

#include "xlene/error.h"

namespace xlene {

namespace {

// out = W x + b, where x is the concatenation of `parts`.
void affine(const Matrix<float>& w, const Matrix<float>& b,
            std::initializer_list<std::span<const double>> parts,
            std::vector<double>& out) {
  std::size_t in = 0;
  for (auto p : parts) in += p.size();
  if (w.cols != in || b.rows != w.rows) throw ShapeError("head layer shape mismatch");
  out.assign(w.rows, 0.0);
  for (std::size_t r = 0; r < w.rows; ++r) {
    auto row = w.row(r);
    double acc = b.data[r];
    std::size_t c = 0;
    for (auto p : parts) {
      for (double x : p) acc += row[c++] * x;
    }
    out[r] = acc;
  }
}

// Accumulates W^T g into the slices of `outs` (concatenated input layout).
void affine_transpose(const Matrix<float>& w, std::span<const double> g,
                      std::initializer_list<std::span<double>> outs) {
  for (std::size_t r = 0; r < w.rows; ++r) {
    if (g[r] == 0.0) continue;
    auto row = w.row(r);
    std::size_t c = 0;
    for (auto o : outs) {
      for (double& x : o) x += row[c++] * g[r];
    }
  }
}

std::vector<double> feed(const std::vector<double>& logits, Feedback fb) {
  if (fb == Feedback::kLogits) return logits;
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = sigmoid(logits[i]);
  return out;
}

// d feed / d logit, applied in place to an upstream gradient.
void feed_backward(const std::vector<double>& fed, Feedback fb, std::vector<double>& g) {
  if (fb == Feedback::kLogits) return;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= fed[i] * (1.0 - fed[i]);
}

// dL_i / d logits for one level.
std::vector<double> level_grad(std::span<const double> z, std::span<const float> y,
                               std::span<const double> w) {
  std::vector<double> g(z.size());
  if (z.empty()) return g;
  const double inv_m = 1.0 / static_cast<double>(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    g[j] = w[j] * inv_m * (sigmoid(z[j]) - static_cast<double>(y[j]));
  }
  return g;
}

void outer_into(Matrix<double>& dw, Matrix<double>& db, std::span<const double> g,
                std::initializer_list<std::span<const double>> parts) {
  for (std::size_t r = 0; r < dw.rows; ++r) {
    db.data[r] += g[r];
    auto row = dw.row(r);
    std::size_t c = 0;
    for (auto p : parts) {
      for (double x : p) row[c++] += g[r] * x;
    }
  }
}

}  // namespace

HeadParams make_head(std::size_t hidden, const LevelDims& dims, HeadKind kind) {
  if (hidden == 0) throw ShapeError("hidden dimension must be positive");
  HeadParams p;
  if (kind == HeadKind::kFlat) {
    p.w4 = Matrix<float>(dims.fine, hidden);
    p.b4 = Matrix<float>(dims.fine, 1);
    return p;
  }
  p.w2 = Matrix<float>(dims.coarse, hidden);
  p.b2 = Matrix<float>(dims.coarse, 1);
  p.w3 = Matrix<float>(dims.mid, hidden + dims.coarse);
  p.b3 = Matrix<float>(dims.mid, 1);
  p.w4 = Matrix<float>(dims.fine, hidden + dims.coarse + dims.mid);
  p.b4 = Matrix<float>(dims.fine, 1);
  return p;
}

HeadGrads zero_grads_like(const HeadParams& p) {
  HeadGrads g;
  g.w2 = Matrix<double>::like(p.w2);
  g.b2 = Matrix<double>::like(p.b2);
  g.w3 = Matrix<double>::like(p.w3);
  g.b3 = Matrix<double>::like(p.b3);
  g.w4 = Matrix<double>::like(p.w4);
  g.b4 = Matrix<double>::like(p.b4);
  return g;
}

std::vector<double>& LevelLogits::level(int i) {
  switch (i) {
    case 2: return y2;
    case 3: return y3;
    case 4: return y4;
  }
  throw ShapeError("level must be 2, 3 or 4");
}

const std::vector<double>& LevelLogits::level(int i) const {
  return const_cast<LevelLogits*>(this)->level(i);
}

std::vector<double>& LossWeights::level(int i) {
  switch (i) {
    case 2: return w2;
    case 3: return w3;
    case 4: return w4;
  }
  throw ShapeError("level must be 2, 3 or 4");
}

const std::vector<double>& LossWeights::level(int i) const {
  return const_cast<LossWeights*>(this)->level(i);
}

LevelLogits forward(std::span<const double> h, const HeadParams& params,
                    const HeadOptions& options, HeadTrace* trace) {
  LevelLogits out;
  if (options.kind == HeadKind::kFlat) {
    affine(params.w4, params.b4, {h}, out.y4);
    return out;
  }
  if (params.w2.cols != h.size()) throw ShapeError("document vector has wrong dimension");
  affine(params.w2, params.b2, {h}, out.y2);
  auto f2 = feed(out.y2, options.feedback);
  affine(params.w3, params.b3, {h, f2}, out.y3);
  auto f3 = feed(out.y3, options.feedback);
  affine(params.w4, params.b4, {h, f2, f3}, out.y4);
  if (trace) {
    trace->f2 = std::move(f2);
    trace->f3 = std::move(f3);
  }
  return out;
}

std::vector<double> level_weights(std::span<const std::uint64_t> counts) {
  if (counts.empty()) throw DataError("cannot weight an empty level");
  long double total = 0;
  for (auto c : counts) total += c;
  const double mean = static_cast<double>(total / counts.size());
  std::vector<double> w(counts.size());
  for (std::size_t j = 0; j < counts.size(); ++j) {
    w[j] = counts[j] == 0 ? 1.0 : std::min(mean / static_cast<double>(counts[j]), 1.0);
  }
  return w;
}

LossWeights compute_weights(std::span<const std::uint64_t> c2,
                            std::span<const std::uint64_t> c3,
                            std::span<const std::uint64_t> c4) {
  // Levels the taxonomy leaves empty have nothing to weight.
  auto weigh = [](std::span<const std::uint64_t> c) {
    return c.empty() ? std::vector<double>{} : level_weights(c);
  };
  return {weigh(c2), weigh(c3), weigh(c4)};
}

LossWeights unit_weights(const LevelDims& dims) {
  return {std::vector<double>(dims.coarse, 1.0), std::vector<double>(dims.mid, 1.0),
          std::vector<double>(dims.fine, 1.0)};
}

LevelCounts count_labels(std::span<const LevelTargets> targets, const LevelDims& dims) {
  LevelCounts c{std::vector<std::uint64_t>(dims.coarse),
                std::vector<std::uint64_t>(dims.mid),
                std::vector<std::uint64_t>(dims.fine)};
  for (const auto& t : targets) {
    for (std::size_t j = 0; j < dims.coarse; ++j) c.c2[j] += t.y2[j] > 0.5f;
    for (std::size_t j = 0; j < dims.mid; ++j) c.c3[j] += t.y3[j] > 0.5f;
    for (std::size_t j = 0; j < dims.fine; ++j) c.c4[j] += t.y4[j] > 0.5f;
  }
  return c;
}

double bce_with_logits(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

double level_loss(std::span<const double> logits, std::span<const float> targets,
                  std::span<const double> weights) {
  if (logits.size() != targets.size() || logits.size() != weights.size()) {
    throw ShapeError("logits, targets and weights differ in size");
  }
  if (logits.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    acc += weights[j] * bce_with_logits(logits[j], targets[j]);
  }
  return acc / static_cast<double>(logits.size());
}

double loss(const LevelLogits& logits, const LevelTargets& targets,
            const LossWeights& weights) {
  double j = 0.0;
  for (int i = 2; i <= 4; ++i) {
    if (logits.level(i).empty()) continue;
    j += level_loss(logits.level(i), targets.level(i), weights.level(i));
  }
  return j;
}

HeadSampleGrad head_sample_grad(std::span<const double> h, const HeadParams& params,
                                const HeadOptions& options,
                                const LevelTargets& targets,
                                const LossWeights& weights) {
  HeadSampleGrad s;
  LevelLogits z = forward(h, params, options, &s.trace);
  s.loss = loss(z, targets, weights);
  s.dh.assign(h.size(), 0.0);

  if (targets.y4.size() != z.y4.size() || weights.w4.size() != z.y4.size()) {
    throw ShapeError("fine-level targets or weights have wrong size");
  }
  s.g4 = level_grad(z.y4, targets.y4, weights.w4);
  if (options.kind == HeadKind::kFlat) {
    affine_transpose(params.w4, s.g4, {s.dh});
    return s;
  }

  std::vector<double> df2(z.y2.size(), 0.0), df3(z.y3.size(), 0.0);
  affine_transpose(params.w4, s.g4, {s.dh, df2, df3});

  feed_backward(s.trace.f3, options.feedback, df3);
  s.g3 = level_grad(z.y3, targets.y3, weights.w3);
  for (std::size_t j = 0; j < s.g3.size(); ++j) s.g3[j] += df3[j];
  affine_transpose(params.w3, s.g3, {s.dh, df2});

  feed_backward(s.trace.f2, options.feedback, df2);
  s.g2 = level_grad(z.y2, targets.y2, weights.w2);
  for (std::size_t j = 0; j < s.g2.size(); ++j) s.g2[j] += df2[j];
  affine_transpose(params.w2, s.g2, {s.dh});
  return s;
}

HeadBackward backward(std::span<const double> h, const HeadParams& params,
                      const HeadOptions& options, const LevelTargets& targets,
                      const LossWeights& weights) {
  HeadSampleGrad s = head_sample_grad(h, params, options, targets, weights);
  HeadBackward out{zero_grads_like(params), s.dh, s.loss};
  if (options.kind == HeadKind::kFlat) {
    outer_into(out.grads.w4, out.grads.b4, s.g4, {h});
    return out;
  }
  outer_into(out.grads.w2, out.grads.b2, s.g2, {h});
  outer_into(out.grads.w3, out.grads.b3, s.g3, {h, s.trace.f2});
  outer_into(out.grads.w4, out.grads.b4, s.g4, {h, s.trace.f2, s.trace.f3});
  return out;
}

}  // namespace xlene
