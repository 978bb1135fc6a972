#include <doctest.h>

#include <cmath>

#include "xlene/encoder.h"
#include "xlene/error.h"
#include "xlene/model.h"
#include "xlene/rng.h"

using namespace xlene;

namespace {

std::string repeat_words(std::size_t m) {
  std::string s;
  for (std::size_t i = 0; i < m; ++i) s += (i ? " w" : "w");
  return s;
}

EncoderParams random_encoder(std::uint64_t seed, std::uint32_t vocab, std::size_t de,
                             std::size_t dh) {
  Pcg32 rng(seed);
  EncoderParams p = make_encoder(vocab, de, dh);
  for (float& x : p.embedding.data) x = rng.uniform_float() - 0.5f;
  for (float& x : p.projection.data) x = rng.uniform_float() - 0.5f;
  for (float& x : p.bias.data) x = 0.2f * (rng.uniform_float() - 0.5f);
  return p;
}

double weighted_output(const TokenSequence& t, const EncoderParams& p,
                       const std::vector<double>& c) {
  auto h = encode(t, p);
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) s += c[i] * h[i];
  return s;
}

}  // namespace

TEST_CASE("subword units") {
  CHECK(subword_units("Ab, cd!") == std::vector<std::string>{"ab", "cd"});
  CHECK(subword_units("Hanoi") ==
        std::vector<std::string>{"hanoi", "han", "ano", "noi"});
  CHECK(subword_units("abc") == std::vector<std::string>{"abc"});
  CHECK(subword_units("").empty());
  CHECK(subword_units(" \t.,;").empty());
  // Non-ASCII bytes stay inside words and 3-grams step by code point.
  auto units = subword_units("çava");
  REQUIRE(units.size() == 3);
  CHECK(units[1] == "\xc3\xa7" "av");
}

TEST_CASE("hash ids avoid reserved tokens") {
  for (std::uint32_t vocab : {3u, 7u, 1024u}) {
    for (auto unit : {"a", "abc", "zzz", "hanoi"}) {
      auto id = hash_unit(unit, vocab);
      CHECK(id >= 2);
      CHECK(id < static_cast<std::int32_t>(vocab));
    }
  }
  CHECK(hash_unit("hanoi", 1024) == hash_unit("hanoi", 1024));
}

TEST_CASE("tokenize framing and truncation") {
  for (std::size_t m : {0u, 1u, 3u, 509u, 510u, 511u, 1000u}) {
    auto t = tokenize(repeat_words(m), 512, 1024);
    CHECK(t.ids.size() == std::min<std::size_t>(m, 510) + 2);
    CHECK(t.ids.front() == kBeginToken);
    CHECK(t.ids.back() == kEndToken);
    CHECK(t.interior().size() == t.ids.size() - 2);
  }
  auto empty = tokenize("", 512);
  CHECK(empty.ids == std::vector<std::int32_t>{kBeginToken, kEndToken});
  CHECK_THROWS_AS(tokenize("a", 2, 1024), ShapeError);
  CHECK_THROWS_AS(tokenize("a", 10, 2), ShapeError);
}

TEST_CASE("encode special cases") {
  auto p = make_encoder(64, 3, 3);
  p.bias.data = {0.5f, -1.0f, 0.0f};
  auto h = encode(tokenize("some words here", 32, 64), p);
  for (int i = 0; i < 3; ++i) CHECK(h[i] == doctest::Approx(std::tanh(p.bias.data[i])));

  auto id = make_encoder(64, 3, 3);
  for (int i = 0; i < 3; ++i) id.projection(i, i) = 1.0f;
  auto t = tokenize("ab", 8, 64);
  REQUIRE(t.interior().size() == 1);
  std::vector<float> v{0.3f, -0.7f, 1.5f};
  for (int c = 0; c < 3; ++c) id.embedding(t.interior()[0], c) = v[c];
  auto hv = encode(t, id);
  for (int i = 0; i < 3; ++i) CHECK(hv[i] == doctest::Approx(std::tanh(static_cast<double>(v[i]))).epsilon(1e-12));

  TokenSequence bad{{kBeginToken, 70, kEndToken}, true};
  CHECK_THROWS_AS(encode(bad, id), ShapeError);
}

TEST_CASE("encode golden vector") {
  ModelSpec spec;
  spec.vocab = 1024;
  spec.embed_dim = 4;
  spec.hidden_dim = 4;
  spec.dims = {1, 1, 1};
  Model model = init_model(spec, 42);
  auto h = encode(tokenize("abc def", 512, 1024), model.params.encoder);
  const std::vector<double> golden{0.14504069213124293, -0.38081363856187161, 0.24837623447657162,
                                    -0.11305290090057428};
  REQUIRE(h.size() == golden.size());
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(h[i] == doctest::Approx(golden[i]).epsilon(1e-12));
  for (double x : h) CHECK(std::abs(x) < 1.0);
}

TEST_CASE("encode gradients match finite differences") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto p = random_encoder(seed, 40, 5, 6);
    auto t = tokenize("the quick brown fox jumps over the lazy dog", 16, 40);
    Pcg32 rng(seed + 100);
    std::vector<double> c(6);
    for (double& x : c) x = rng.uniform_double() * 2.0 - 1.0;
    auto g = encode_gradients(t, p, c);
    auto check = [&](Matrix<float>& param, const Matrix<double>& grad) {
      for (std::size_t i = 0; i < param.size(); ++i) {
        float saved = param.data[i];
        float up = static_cast<float>(saved + 1e-3);
        float down = static_cast<float>(saved - 1e-3);
        param.data[i] = up;
        double lu = weighted_output(t, p, c);
        param.data[i] = down;
        double ld = weighted_output(t, p, c);
        param.data[i] = saved;
        double numeric = (lu - ld) / (static_cast<double>(up) - down);
        double err = std::abs(numeric - grad.data[i]);
        double scale = std::max(std::abs(numeric), std::abs(grad.data[i]));
        CHECK((err <= 1e-6 || err / scale < 1e-4));
      }
    };
    check(p.embedding, g.embedding);
    check(p.projection, g.projection);
    check(p.bias, g.bias);
  }
}

TEST_CASE("encode gradient degenerate inputs") {
  auto p = random_encoder(9, 32, 4, 5);
  auto t = tokenize("alpha beta", 16, 32);
  auto zero = encode_gradients(t, p, std::vector<double>(5, 0.0));
  for (auto* m : {&zero.embedding, &zero.projection, &zero.bias}) {
    for (double x : m->data) CHECK(x == 0.0);
  }

  std::vector<double> dh{1.0, -2.0, 0.5, 0.0, 3.0};
  auto empty = encode_gradients(tokenize("", 16, 32), p, dh);
  for (double x : empty.embedding.data) CHECK(x == 0.0);
  for (double x : empty.projection.data) CHECK(x == 0.0);
  for (std::size_t i = 0; i < dh.size(); ++i) {
    double th = std::tanh(static_cast<double>(p.bias.data[i]));
    CHECK(empty.bias.data[i] == doctest::Approx(dh[i] * (1.0 - th * th)).epsilon(1e-14));
  }
}
