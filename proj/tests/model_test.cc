#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "xlene/adam.h"
#include "xlene/checkpoint.h"
#include "xlene/error.h"
#include "xlene/kernels.h"
#include "xlene/model.h"
#include "xlene/rng.h"

using namespace xlene;

namespace {

ModelSpec small_spec(HeadKind kind = HeadKind::kHierarchical) {
  ModelSpec spec;
  spec.vocab = 64;
  spec.embed_dim = 5;
  spec.hidden_dim = 6;
  spec.dims = {3, 5, 7};
  spec.head.kind = kind;
  return spec;
}

std::vector<kernels::Example> random_examples(const ModelSpec& spec, std::size_t n,
                                              std::uint64_t seed) {
  Pcg32 rng(seed);
  std::vector<kernels::Example> out(n);
  for (auto& ex : out) {
    std::string text;
    std::size_t words = 1 + rng.bounded(10);
    for (std::size_t w = 0; w < words; ++w) text += "w" + std::to_string(rng.bounded(40)) + " ";
    ex.tokens = tokenize(text, 16, spec.vocab);
    auto bits = [&](std::size_t k) {
      std::vector<float> v(k);
      for (float& x : v) x = rng.bounded(3) == 0 ? 1.0f : 0.0f;
      return v;
    };
    ex.targets = {bits(spec.dims.coarse), bits(spec.dims.mid), bits(spec.dims.fine)};
  }
  return out;
}

std::vector<const kernels::Example*> pointers(const std::vector<kernels::Example>& v) {
  std::vector<const kernels::Example*> out;
  for (const auto& e : v) out.push_back(&e);
  return out;
}

}  // namespace

TEST_CASE("init is deterministic and well-formed") {
  auto a = init_model(small_spec(), 3);
  auto b = init_model(small_spec(), 3);
  auto c = init_model(small_spec(), 4);
  CHECK(a.params == b.params);
  CHECK_FALSE(a.params == c.params);
  for (float x : a.params.encoder.embedding.data) CHECK(std::abs(x) <= 0.5f);
  for (float x : a.params.head.b4.data) CHECK(x == 0.0f);
  auto flat = init_model(small_spec(HeadKind::kFlat), 3);
  CHECK(flat.params.head.w2.empty());
  CHECK(flat.params.head.w4.same_shape(7, 6));
}

TEST_CASE("adam first step and zero gradient") {
  auto model = init_model(small_spec(), 1);
  AdamConfig cfg{0.01, 0.9, 0.999, 1e-8};
  auto state = make_adam_state(model.params, cfg);
  auto grads = ModelGrads::like(model.params);
  Pcg32 rng(2);
  for (auto* g : grads.tensors()) {
    for (double& x : g->data) x = rng.uniform_double() - 0.5;
  }
  auto before = model.params;
  adam_step(model.params, grads, state);
  CHECK(state.step == 1);
  auto after = model.params.tensors();
  auto prev = before.tensors();
  auto gs = grads.tensors();
  for (std::size_t t = 0; t < kTensorCount; ++t) {
    for (std::size_t i = 0; i < after[t]->size(); ++i) {
      double g = gs[t]->data[i];
      double delta = static_cast<double>(after[t]->data[i]) - prev[t]->data[i];
      double expected = g > 0 ? -0.01 : 0.01;
      CHECK(delta == doctest::Approx(expected).epsilon(1e-3).scale(0.0));
    }
  }

  auto zero = ModelGrads::like(model.params);
  auto held = model.params;
  auto fresh = make_adam_state(model.params, cfg);
  adam_step(model.params, zero, fresh);
  CHECK(fresh.step == 1);
  CHECK(model.params == held);
}

TEST_CASE("adam two-step trace") {
  Model model;
  model.params.encoder.bias = Matrix<float>(2, 1);
  model.params.encoder.bias.data = {0.5f, -0.25f};
  auto state = make_adam_state(model.params, {0.01, 0.9, 0.999, 1e-8});
  auto grads = ModelGrads::like(model.params);
  grads.encoder.bias.data = {0.1, -0.2};
  adam_step(model.params, grads, state);
  CHECK(model.params.encoder.bias.data[0] == doctest::Approx(0.4900000009999999).epsilon(1e-6));
  CHECK(model.params.encoder.bias.data[1] == doctest::Approx(-0.24000000049999998).epsilon(1e-6));
  grads.encoder.bias.data = {0.05, 0.3};
  adam_step(model.params, grads, state);
  // Values from a plain double-precision Adam recurrence.
  CHECK(model.params.encoder.bias.data[0] == doctest::Approx(0.4806782057911871).epsilon(1e-6));
  CHECK(model.params.encoder.bias.data[1] == doctest::Approx(-0.2424770185641943).epsilon(1e-6));
  CHECK(state.m.encoder.bias.data[0] == doctest::Approx(0.014).epsilon(1e-6));
  CHECK(state.v.encoder.bias.data[1] == doctest::Approx(0.00012996).epsilon(1e-6));
}

TEST_CASE("adam rejects non-finite gradients") {
  auto model = init_model(small_spec(), 1);
  auto state = make_adam_state(model.params, {});
  auto grads = ModelGrads::like(model.params);
  grads.head.w3.data[2] = std::numeric_limits<double>::quiet_NaN();
  auto held = model.params;
  try {
    adam_step(model.params, grads, state);
    FAIL("expected a numeric error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("head.w3") != std::string::npos);
  }
  CHECK(state.step == 0);
  CHECK(model.params == held);
}

TEST_CASE("checkpoint round trip and corruption") {
  Checkpoint ckpt;
  ckpt.taxonomy_hash = 0x1234abcdULL;
  ckpt.model = init_model(small_spec(), 9);
  ckpt.model.spec.head.feedback = Feedback::kSigmoid;
  ckpt.optimizer = make_adam_state(ckpt.model.params, {2e-5, 0.9, 0.999, 1e-8});
  ckpt.optimizer->step = 17;
  ckpt.optimizer->m.head.w4.data[3] = 0.25f;
  ckpt.metadata = R"({"stage":"test"})";
  std::stringstream buf;
  write_checkpoint(buf, ckpt);
  const std::string bytes = buf.str();

  std::istringstream in(bytes);
  auto back = read_checkpoint(in, 0x1234abcdULL);
  CHECK(back.model.spec == ckpt.model.spec);
  CHECK(back.model.params == ckpt.model.params);
  REQUIRE(back.optimizer);
  CHECK(back.optimizer->step == 17);
  CHECK(back.optimizer->config == ckpt.optimizer->config);
  CHECK(back.optimizer->m == ckpt.optimizer->m);
  CHECK(back.optimizer->v == ckpt.optimizer->v);
  CHECK(back.metadata == ckpt.metadata);

  std::stringstream again;
  write_checkpoint(again, back);
  CHECK(again.str() == bytes);

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::istringstream m(bad_magic);
  CHECK_THROWS_AS(read_checkpoint(m), DataError);

  std::string bad_version = bytes;
  bad_version[4] = 9;
  std::istringstream v(bad_version);
  CHECK_THROWS_AS(read_checkpoint(v), DataError);

  std::istringstream cut(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(read_checkpoint(cut), DataError);

  std::istringstream other(bytes);
  try {
    read_checkpoint(other, 42);
    FAIL("expected a hash mismatch");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("hash mismatch") != std::string::npos);
  }
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
  for (auto kind : {HeadKind::kHierarchical, HeadKind::kFlat}) {
    auto spec = small_spec(kind);
    auto model = init_model(spec, 21);
    auto docs = random_examples(spec, 13, 22);
    auto ptrs = pointers(docs);
    LossWeights weights{std::vector<double>(3, 0.7), std::vector<double>(5, 1.0),
                        std::vector<double>(7, 0.4)};
    auto serial = kernels::batch_gradients_serial(model, ptrs, weights);
    for (int workers : {1, 2, 4, 7}) {
      auto parallel = kernels::batch_gradients_parallel(model, ptrs, weights, workers);
      CHECK(parallel.loss == serial.loss);
      CHECK(parallel.grads == serial.grads);
      CHECK(kernels::fine_logits_parallel(model, ptrs, workers) ==
            kernels::fine_logits_serial(model, ptrs));
    }
  }

  Pcg32 rng(3);
  std::vector<float> p(1000), m1(1000), v1(1000);
  std::vector<double> g(1000);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = rng.uniform_float();
    g[i] = rng.uniform_double() - 0.5;
  }
  auto p2 = p, m2 = m1, v2 = v1;
  for (std::uint64_t step = 1; step <= 3; ++step) {
    kernels::adam_update_serial(p, g, m1, v1, {}, step);
    kernels::adam_update_parallel(p2, g, m2, v2, {}, step, 4);
  }
  CHECK(p == p2);
  CHECK(m1 == m2);
  CHECK(v1 == v2);
}

TEST_CASE("precomputed vectors bypass the encoder") {
  ModelSpec spec = small_spec();
  spec.vocab = 0;
  spec.embed_dim = 0;
  auto model = init_model(spec, 5);
  CHECK(model.params.encoder.embedding.empty());
  kernels::Example ex;
  ex.fixed_h = {0.1f, -0.2f, 0.3f, 0.0f, 0.5f, -0.6f};
  ex.targets = {std::vector<float>(3), std::vector<float>(5), std::vector<float>(7)};
  auto h = kernels::document_vector(model, ex);
  CHECK(h.size() == 6);
  CHECK(h[1] == doctest::Approx(-0.2));
  const kernels::Example* one[] = {&ex};
  auto g = kernels::batch_gradients_serial(model, one, unit_weights(spec.dims));
  CHECK(g.grads.encoder.embedding.empty());
  CHECK(std::isfinite(g.loss));
}
