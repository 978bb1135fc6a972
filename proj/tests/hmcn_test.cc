#include <doctest.h>

#include <cmath>

#include "xlene/error.h"
#include "xlene/hmcn.h"
#include "xlene/rng.h"

using namespace xlene;

namespace {

struct HeadCase {
  HeadParams params;
  HeadOptions options;
  std::vector<double> h;
  LevelTargets targets;
  LossWeights weights;
};

HeadCase random_case(std::uint64_t seed, HeadOptions options) {
  Pcg32 rng(seed);
  const LevelDims dims{3, 5, 7};
  const std::size_t dh = 8;
  HeadCase c{make_head(dh, dims, options.kind), options, {}, {}, {}};
  auto fill = [&](Matrix<float>& m) {
    for (float& x : m.data) x = rng.uniform_float() - 0.5f;
  };
  for (auto* m : {&c.params.w2, &c.params.b2, &c.params.w3, &c.params.b3, &c.params.w4,
                  &c.params.b4}) {
    fill(*m);
  }
  c.h.resize(dh);
  for (double& x : c.h) x = rng.uniform_double() * 2.0 - 1.0;
  auto bits = [&](std::size_t n) {
    std::vector<float> v(n);
    for (float& x : v) x = rng.bounded(2) ? 1.0f : 0.0f;
    return v;
  };
  auto ws = [&](std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = 0.1 + 0.9 * rng.uniform_double();
    return v;
  };
  c.targets = {bits(3), bits(5), bits(7)};
  c.weights = {ws(3), ws(5), ws(7)};
  return c;
}

double case_loss(const HeadCase& c, std::span<const double> h) {
  return loss(forward(h, c.params, c.options), c.targets, c.weights);
}

void check_close(double analytic, double numeric) {
  double err = std::abs(analytic - numeric);
  double scale = std::max(std::abs(analytic), std::abs(numeric));
  CHECK((err <= 1e-6 || err / scale < 1e-4));
}

void check_backward(HeadCase c) {
  auto b = backward(c.h, c.params, c.options, c.targets, c.weights);
  CHECK(b.loss == doctest::Approx(case_loss(c, c.h)).epsilon(1e-12));
  auto pairs = std::vector<std::pair<Matrix<float>*, const Matrix<double>*>>{
      {&c.params.w2, &b.grads.w2}, {&c.params.b2, &b.grads.b2}, {&c.params.w3, &b.grads.w3},
      {&c.params.b3, &b.grads.b3}, {&c.params.w4, &b.grads.w4}, {&c.params.b4, &b.grads.b4}};
  for (auto [param, grad] : pairs) {
    REQUIRE(param->size() == grad->size());
    for (std::size_t i = 0; i < param->size(); ++i) {
      float saved = param->data[i];
      float up = static_cast<float>(saved + 1e-3);
      float down = static_cast<float>(saved - 1e-3);
      param->data[i] = up;
      double lu = case_loss(c, c.h);
      param->data[i] = down;
      double ld = case_loss(c, c.h);
      param->data[i] = saved;
      check_close(grad->data[i], (lu - ld) / (static_cast<double>(up) - down));
    }
  }
  for (std::size_t i = 0; i < c.h.size(); ++i) {
    auto hp = c.h, hm = c.h;
    hp[i] += 1e-5;
    hm[i] -= 1e-5;
    check_close(b.dh[i], (case_loss(c, hp) - case_loss(c, hm)) / 2e-5);
  }
}

}  // namespace

TEST_CASE("forward hand evaluation") {
  auto p = make_head(2, {1, 1, 1}, HeadKind::kHierarchical);
  auto zero = forward(std::vector<double>{0.3, -0.2}, p, {});
  CHECK(zero.y2 == std::vector<double>{0.0});
  CHECK(zero.y3 == std::vector<double>{0.0});
  CHECK(zero.y4 == std::vector<double>{0.0});

  p.w2.data = {1.0f, 0.0f};
  p.w3.data = {0.0f, 0.0f, 1.0f};
  p.w4.data = {1.0f, 2.0f, 3.0f, 4.0f};
  auto z = forward(std::vector<double>{3.0, 5.0}, p, {});
  CHECK(z.y2[0] == 3.0);
  CHECK(z.y3[0] == 3.0);
  CHECK(z.y4[0] == 1 * 3 + 2 * 5 + 3 * 3 + 4 * 3);

  HeadOptions sig{HeadKind::kHierarchical, Feedback::kSigmoid};
  auto s = forward(std::vector<double>{3.0, 5.0}, p, sig);
  CHECK(s.y3[0] == doctest::Approx(sigmoid(3.0)));

  auto flat = make_head(2, {4, 6, 5}, HeadKind::kFlat);
  auto f = forward(std::vector<double>{1.0, 1.0}, flat, {HeadKind::kFlat, Feedback::kLogits});
  CHECK(f.y2.empty());
  CHECK(f.y3.empty());
  CHECK(f.y4.size() == 5);
  CHECK_THROWS_AS(forward(std::vector<double>{1.0}, p, {}), ShapeError);
}

TEST_CASE("frequency weights") {
  std::vector<std::uint64_t> a{4, 1, 1}, b{5, 5, 5}, c{2, 0};
  CHECK(level_weights(a) == std::vector<double>{0.5, 1.0, 1.0});
  CHECK(level_weights(b) == std::vector<double>{1.0, 1.0, 1.0});
  CHECK(level_weights(c) == std::vector<double>{0.5, 1.0});
  std::vector<std::uint64_t> zeros{0, 0};
  CHECK(level_weights(zeros) == std::vector<double>{1.0, 1.0});
  CHECK_THROWS_AS(level_weights({}), DataError);
}

TEST_CASE("count labels") {
  std::vector<LevelTargets> t{{{1, 0}, {1}, {0, 1}}, {{1, 1}, {0}, {1, 1}}};
  auto c = count_labels(t, {2, 1, 2});
  CHECK(c.c2 == std::vector<std::uint64_t>{2, 1});
  CHECK(c.c3 == std::vector<std::uint64_t>{1});
  CHECK(c.c4 == std::vector<std::uint64_t>{1, 2});
}

TEST_CASE("loss values") {
  LevelLogits zero{{0, 0, 0}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0, 0}};
  LevelTargets t{{1, 0, 1}, {0, 0, 1, 1, 0}, {1, 0, 0, 0, 0, 0, 1}};
  CHECK(std::abs(loss(zero, t, unit_weights({3, 5, 7})) - 3.0 * std::log(2.0)) < 1e-9);

  std::vector<double> z{0.0, 0.0}, w{0.5, 1.0};
  std::vector<float> y{1.0f, 0.0f};
  CHECK(level_loss(z, y, w) == doctest::Approx(0.75 * std::log(2.0)).epsilon(1e-12));
  CHECK(level_loss(z, y, w) == doctest::Approx(0.519860).epsilon(1e-6));

  CHECK(bce_with_logits(1000.0, 1.0) == doctest::Approx(0.0));
  CHECK(bce_with_logits(-1000.0, 1.0) == doctest::Approx(1000.0));
  LevelLogits big{{1e4, -1e4, 1e4}, {-1e4, 1e4, 1e4, -1e4, 1e4}, {1e4, 1e4, -1e4, 1e4, -1e4, 1e4, 1e4}};
  CHECK(std::isfinite(loss(big, t, unit_weights({3, 5, 7}))));
  std::vector<float> short_y{1.0f};
  CHECK_THROWS_AS(level_loss(z, short_y, w), ShapeError);
}

TEST_CASE("backward matches finite differences") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    check_backward(random_case(seed, {HeadKind::kHierarchical, Feedback::kLogits}));
    check_backward(random_case(seed, {HeadKind::kHierarchical, Feedback::kSigmoid}));
    check_backward(random_case(seed, {HeadKind::kFlat, Feedback::kLogits}));
  }
}

TEST_CASE("stationary point and zero weights") {
  auto flat = make_head(4, {2, 3, 5}, HeadKind::kFlat);
  LevelTargets half{{}, {}, std::vector<float>(5, 0.5f)};
  LossWeights unit{{}, {}, std::vector<double>(5, 1.0)};
  auto b = backward(std::vector<double>{0.1, 0.2, 0.3, 0.4}, flat,
                    {HeadKind::kFlat, Feedback::kLogits}, half, unit);
  for (double x : b.grads.w4.data) CHECK(x == 0.0);
  for (double x : b.grads.b4.data) CHECK(x == 0.0);

  auto c = random_case(4, {});
  for (auto* w : {&c.weights.w2, &c.weights.w3, &c.weights.w4}) std::fill(w->begin(), w->end(), 0.0);
  auto z = backward(c.h, c.params, c.options, c.targets, c.weights);
  CHECK(z.loss == 0.0);
  for (const auto* m : {&z.grads.w2, &z.grads.b2, &z.grads.w3, &z.grads.b3, &z.grads.w4,
                        &z.grads.b4}) {
    for (double x : m->data) CHECK(x == 0.0);
  }
  for (double x : z.dh) CHECK(x == 0.0);
}

TEST_CASE("weight scaling scales loss and gradients") {
  auto c = random_case(5, {});
  auto base = backward(c.h, c.params, c.options, c.targets, c.weights);
  auto scaled_weights = c.weights;
  for (auto* w : {&scaled_weights.w2, &scaled_weights.w3, &scaled_weights.w4}) {
    for (double& x : *w) x *= 4.0;
  }
  auto scaled = backward(c.h, c.params, c.options, c.targets, scaled_weights);
  CHECK(scaled.loss == doctest::Approx(4.0 * base.loss).epsilon(1e-12));
  for (std::size_t i = 0; i < base.grads.w4.size(); ++i) {
    CHECK(scaled.grads.w4.data[i] == doctest::Approx(4.0 * base.grads.w4.data[i]).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < base.dh.size(); ++i) {
    CHECK(scaled.dh[i] == doctest::Approx(4.0 * base.dh[i]).epsilon(1e-12));
  }
}
