#include <algorithm>
#include <cmath>

#include "crisislens/diffcore/gradcheck.hpp"
#include "crisislens/error.hpp"
#include "crisislens/mscn/mscn.hpp"
#include "doctest.h"

using namespace crisislens;
using namespace crisislens::mscn;
using diff::Tensor;

namespace {

Tensor random_tensor(Rng& rng, diff::Shape shape, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = scale * rng.normal();
  return t;
}

diff::ParamStore small_store(const MscnConfig& cfg, std::size_t d_model, std::uint64_t seed) {
  diff::ParamStore store;
  Rng rng(seed);
  init_mscn_params(store, cfg, d_model, rng);
  return store;
}

std::size_t argmax(const Tensor& t) {
  return static_cast<std::size_t>(std::max_element(t.values().begin(), t.values().end()) - t.values().begin());
}

}  // namespace

TEST_CASE("mscn_forward zero case and shape") {
  const MscnConfig cfg{.widths = {2, 3}, .channels = 3, .d_h = 5};
  diff::ParamStore store = small_store(cfg, 4, 1);
  for (auto& [name, p] : store) p.value.fill(0.0);
  CHECK(mscn_forward(store, cfg, Tensor({6, 4})) == Tensor({1, 5}));

  diff::ParamStore trained = small_store(cfg, 4, 2);
  Rng rng(3);
  for (std::size_t len = 1; len <= 9; ++len) {
    CHECK(mscn_forward(trained, cfg, random_tensor(rng, {len, 4})).shape() == diff::Shape{1, 5});
  }
}

TEST_CASE("short sequences are PAD-extended") {
  const MscnConfig cfg{.widths = {2, 3, 4}, .channels = 3, .d_h = 4};
  diff::ParamStore store = small_store(cfg, 3, 4);
  const Tensor token = Tensor::matrix({{0.4, -1.1, 0.7}});
  const Tensor padded = Tensor::matrix({{0.4, -1.1, 0.7}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  CHECK(mscn_forward(store, cfg, token) == mscn_forward(store, cfg, padded));
  CHECK_THROWS_AS(mscn_forward(store, cfg, Tensor({0, 3})), Error);
}

TEST_CASE("adaptive_weights examples") {
  Rng rng(5);
  const Tensor s = random_tensor(rng, {1, 4});
  const Tensor uniform = adaptive_weights(s, Tensor({4, 4}));
  for (double v : uniform.values()) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
  const Tensor zero_s = adaptive_weights(Tensor({1, 4}), random_tensor(rng, {4, 4}));
  for (double v : zero_s.values()) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
  // s·W_a = [0, ln 3]
  const Tensor hand = adaptive_weights(Tensor::row({1.0, 0.0}), Tensor::matrix({{0.0, std::log(3.0)}, {5.0, 5.0}}));
  CHECK(hand[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(hand[1] == doctest::Approx(0.75).epsilon(1e-14));
  try {
    adaptive_weights(s, Tensor({3, 3}));
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Dimension);
  }
}

TEST_CASE("adaptive_sentiment examples") {
  const Tensor s = Tensor::row({2.0, 4.0});
  CHECK(adaptive_sentiment(s, Tensor::row({0.5, 0.5})) == Tensor::row({1.0, 2.0}));
  CHECK(adaptive_sentiment(Tensor({1, 2}), Tensor::row({0.25, 0.75})) == Tensor({1, 2}));
  CHECK(adaptive_sentiment(s, Tensor::row({0.25, 0.75})) == Tensor::row({0.5, 3.0}));
  CHECK_THROWS_AS(adaptive_sentiment(s, Tensor::row({1.0})), Error);
}

TEST_CASE("emotion_heads examples") {
  HeadParams zero{Tensor({2, 3}), Tensor({3}), Tensor({2, 3}), Tensor({3}), 1.0};
  auto [pz, iz] = emotion_heads(Tensor::row({0.3, -0.2}), zero);
  CHECK(pz == Tensor({1, 3}));
  CHECK(iz == Tensor({1, 3}));
  const Tensor probs = diff::ops::softmax_axis(pz, 1);
  for (double v : probs.values()) CHECK(v == doctest::Approx(1.0 / 3.0));

  HeadParams hand{Tensor::matrix({{1, 0, -1}, {2, 1, 0}}), Tensor::vector({0.5, 0, 0}),
                  Tensor::matrix({{0, 1, 0}, {0, 0, 1}}), Tensor::vector({0, 0, 0}), 1.0};
  auto [ph, ih] = emotion_heads(Tensor::row({1.0, 2.0}), hand);
  CHECK(ph == Tensor::row({5.5, 2.0, -1.0}));
  CHECK(ih == Tensor::row({0.0, 1.0, 2.0}));
  hand.input_scale = 2.0;
  CHECK(emotion_heads(Tensor::row({0.5, 1.0}), hand).first == Tensor::row({5.5, 2.0, -1.0}));
  CHECK_THROWS_AS(emotion_heads(Tensor::row({1.0, 2.0, 3.0}), hand), Error);
}

TEST_CASE("adaptive weight invariants (property)") {
  Rng rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t d = 1 + rng.index(8);
    const Tensor s = random_tensor(rng, {1, d}, 2.0);
    const Tensor w = random_tensor(rng, {d, d}, 2.0);
    const Tensor a = adaptive_weights(s, w);
    double total = 0.0;
    for (double v : a.values()) {
      CHECK(v > 0.0);
      CHECK(v < 1.0 + (d == 1 ? 1e-12 : 0.0));
      total += v;
    }
    CHECK(std::abs(total - 1.0) <= 1e-9);

    // Shift every logit by k·Σs by adding k to every weight.
    Tensor shifted = w;
    const double k = rng.uniform(-3, 3);
    for (auto& v : shifted.values()) v += k;
    CHECK(argmax(adaptive_weights(s, shifted)) == argmax(a));

    const Tensor sa = adaptive_sentiment(s, a);
    double l1 = 0.0, linf = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      l1 += std::abs(sa[i]);
      linf = std::max(linf, std::abs(s[i]));
    }
    CHECK(l1 <= linf + 1e-12);
  }
}

TEST_CASE("sentiment output invariants") {
  const MscnConfig cfg{.widths = {2, 3}, .channels = 4, .d_h = 6};
  diff::ParamStore store = small_store(cfg, 5, 7);
  Rng rng(8);
  const SentimentOutput out = sentiment(store, cfg, random_tensor(rng, {7, 5}));
  double total = 0.0;
  for (double v : out.a.values()) total += v;
  CHECK(std::abs(total - 1.0) <= 1e-9);
  CHECK(out.s_adaptive == diff::ops::hadamard(out.s, out.a));
  CHECK(out.polarity_logits.size() == 3);
  CHECK(out.intensity_logits.size() == 3);
}

TEST_CASE("end-to-end mscn gradient passes grad_check") {
  const MscnConfig cfg{.widths = {2, 3}, .channels = 3, .d_h = 4};
  diff::ParamStore store = small_store(cfg, 4, 9);
  Rng rng(10);
  store.add("input", random_tensor(rng, {5, 4}));
  auto f = [&](diff::Graph& g, const diff::ParamStore& s) {
    auto out = sentiment(g, s, cfg, g.param(s, "input"));
    return diff::sum(out.s_adaptive);
  };
  const auto report = diff::grad_check(f, store, 1e-4);
  INFO("worst ", report.worst_param(), " = ", report.worst());
  CHECK(report.worst() <= 1e-3);

  auto heads = [&](diff::Graph& g, const diff::ParamStore& s) {
    auto out = sentiment(g, s, cfg, g.param(s, "input"));
    return diff::add(diff::sum(out.polarity_logits), diff::sum(diff::hadamard(out.intensity_logits, out.intensity_logits)));
  };
  CHECK(diff::grad_check(heads, store, 1e-4).worst() <= 1e-3);
}
